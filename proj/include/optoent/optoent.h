/* C interface to the optoent library. Objects are opaque handles released
 * with the matching *_destroy call. Every function returns an optoent_status;
 * on failure optoent_last_error() describes the problem (per thread). Strings
 * returned through char** are released with optoent_string_free. */
#ifndef OPTOENT_OPTOENT_H
#define OPTOENT_OPTOENT_H

#include <stddef.h>

#if defined(OPTOENT_BUILDING_LIBRARY)
#define OPTOENT_API __attribute__((visibility("default")))
#else
#define OPTOENT_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
    OPTOENT_OK = 0,
    OPTOENT_ERR_INTERNAL = 1,
    OPTOENT_ERR_CONTRACT = 2,
    OPTOENT_ERR_NONCONVERGENCE = 3,
    OPTOENT_ERR_UNSTABLE = 4,
    OPTOENT_ERR_IO = 5
} optoent_status;

typedef enum {
    OPTOENT_METHOD_EXACT = 0,
    OPTOENT_METHOD_MATRIX_FORM = 1,
    OPTOENT_METHOD_CLOSED_FORM = 2,
    OPTOENT_METHOD_COVARIANCE = 3
} optoent_method;

typedef enum { OPTOENT_BROWNIAN_MOMENTUM_ONLY = 0, OPTOENT_BROWNIAN_SYMMETRIC = 1 } optoent_brownian;

/* Angular rates in rad/s. */
typedef struct {
    double omega_m, kappa, gamma_m, g, delta, n_th, eta;
    int brownian;
} optoent_system_params;

typedef struct {
    double gamma_ro, gamma_th, c_q, c_cl, q_factor;
} optoent_rates;

typedef struct {
    double gamma; /* rad/s */
    double t_sep; /* s */
    double phi;   /* rad */
} optoent_pulse_params;

typedef struct {
    double real_parts[4];
    int stable;
    double margin;
    int routh_hurwitz_stable;
} optoent_stability_report;

typedef struct {
    double value, phi_used, gamma_used;
    int method;
    int entangled;
    double margin, error;
    int domain_warning, phi_degenerate;
} optoent_epr_result;

typedef struct optoent_config optoent_config;
typedef struct optoent_covariance optoent_covariance;
typedef struct optoent_table optoent_table;
typedef struct optoent_ensemble optoent_ensemble;

OPTOENT_API const char* optoent_version(void);
OPTOENT_API const char* optoent_last_error(void);
OPTOENT_API const char* optoent_status_name(optoent_status status);
OPTOENT_API void optoent_string_free(char* s);

/* Configuration: flat key/value layers. */
OPTOENT_API optoent_status optoent_config_create(int with_defaults, optoent_config** out);
OPTOENT_API optoent_status optoent_config_load_file(const char* path, optoent_config** out);
OPTOENT_API optoent_status optoent_config_parse(const char* text, optoent_config** out);
OPTOENT_API optoent_status optoent_config_set(optoent_config* cfg, const char* key, const char* value);
OPTOENT_API optoent_status optoent_config_get(const optoent_config* cfg, const char* key, char** out);
/* Entries of `upper` win over `lower`. */
OPTOENT_API optoent_status optoent_config_merge(const optoent_config* lower, const optoent_config* upper,
                                                optoent_config** out);
OPTOENT_API optoent_status optoent_config_to_text(const optoent_config* cfg, char** out);
OPTOENT_API optoent_status optoent_config_system(const optoent_config* cfg, optoent_system_params* out);
/* Resolves gamma_hz = "opt" to the optimal bandwidth; phi = "opt" becomes 0. */
OPTOENT_API optoent_status optoent_config_pulse(const optoent_config* cfg, const optoent_system_params* params,
                                                optoent_pulse_params* out);
OPTOENT_API void optoent_config_destroy(optoent_config* cfg);

/* Model. */
OPTOENT_API optoent_status optoent_baseline(optoent_system_params* out);
OPTOENT_API optoent_status optoent_derived_rates(const optoent_system_params* params, optoent_rates* out);
OPTOENT_API optoent_status optoent_coupling_for_cooperativity(const optoent_system_params* params, double c_q,
                                                              double* g_out);
OPTOENT_API optoent_status optoent_stability(const optoent_system_params* params, optoent_stability_report* out);
/* Row-major 2x4 transfer matrix at angular frequency omega; columns
 * (x_in, p_in, xi, xi_x). */
OPTOENT_API optoent_status optoent_transfer(const optoent_system_params* params, double omega, double re[8],
                                            double im[8]);

/* EPR variance. */
OPTOENT_API optoent_status optoent_gamma_opt(const optoent_system_params* params, double* out);
OPTOENT_API optoent_status optoent_epr_evaluate(const optoent_system_params* params, const optoent_pulse_params* pulse,
                                                optoent_method method, optoent_epr_result* out);
/* Best phi at fixed bandwidth. */
OPTOENT_API optoent_status optoent_epr_optimize_phi(const optoent_system_params* params,
                                                    const optoent_pulse_params* pulse, optoent_method method,
                                                    optoent_epr_result* out);
/* Minimizes over the bandwidth; phi is optimized when optimize_phi != 0,
 * otherwise held at `phi`. */
OPTOENT_API optoent_status optoent_epr_minimize(const optoent_system_params* params, optoent_method method,
                                                double t_sep, int optimize_phi, double phi, optoent_epr_result* out);

/* Two-mode covariance matrices, ordering (xE, pE, xL, pL), vacuum = identity. */
OPTOENT_API optoent_status optoent_covariance_from_spectra(const optoent_system_params* params,
                                                           const optoent_pulse_params* pulse,
                                                           optoent_covariance** out);
OPTOENT_API optoent_status optoent_covariance_from_entries(const double entries[16], optoent_covariance** out);
OPTOENT_API optoent_status optoent_covariance_two_mode_squeezed(double r, optoent_covariance** out);
/* Bandwidth minimizing the optimal witness; returns the covariance there. */
OPTOENT_API optoent_status optoent_covariance_witness_scan(const optoent_system_params* params, double t_sep,
                                                           double* gamma_out, optoent_covariance** out);
OPTOENT_API optoent_status optoent_covariance_entries(const optoent_covariance* cov, double entries[16]);
OPTOENT_API optoent_status optoent_covariance_duan(const optoent_covariance* cov, double phi, double* out);
OPTOENT_API optoent_status optoent_covariance_optimal_phi(const optoent_covariance* cov, double* out);
OPTOENT_API optoent_status optoent_covariance_ppt(const optoent_covariance* cov, int* entangled);
OPTOENT_API optoent_status optoent_covariance_log_negativity(const optoent_covariance* cov, double* out);
OPTOENT_API optoent_status optoent_covariance_symplectic(const optoent_covariance* cov, int transposed,
                                                         double nu[2]);
OPTOENT_API optoent_status optoent_covariance_witness(const optoent_covariance* cov, double* out);
OPTOENT_API optoent_status optoent_covariance_physical(const optoent_covariance* cov, int* physical);
OPTOENT_API optoent_status optoent_covariance_to_json(const optoent_covariance* cov, int late_first, char** out);
OPTOENT_API void optoent_covariance_destroy(optoent_covariance* cov);

/* Sweeps. `methods` is a comma-separated subset of
 * closed_form,exact,matrix_form,witness,montecarlo. */
OPTOENT_API optoent_status optoent_grid(double min, double max, int count, int log_spacing, double* out);
OPTOENT_API optoent_status optoent_sweep_run(const optoent_config* cfg, const char* axis, const double* points,
                                             size_t n_points, const char* methods, optoent_table** out);
OPTOENT_API optoent_status optoent_figure_run(const char* name, const optoent_config* overrides,
                                              optoent_table** out);
OPTOENT_API optoent_status optoent_table_rows(const optoent_table* table, size_t* out);
OPTOENT_API optoent_status optoent_table_value(const optoent_table* table, size_t row, const char* column,
                                               double* out);
OPTOENT_API optoent_status optoent_table_error(const optoent_table* table, size_t row, char** out);
/* Empty or NULL timestamp omits the metadata line. */
OPTOENT_API optoent_status optoent_table_to_csv(const optoent_table* table, const char* timestamp, char** out);
OPTOENT_API optoent_status optoent_table_to_json(const optoent_table* table, const char* timestamp, char** out);
OPTOENT_API void optoent_table_destroy(optoent_table* table);

/* Monte Carlo; n_traj, seed, dt and threads come from the config. */
OPTOENT_API optoent_status optoent_ensemble_run(const optoent_system_params* params,
                                                const optoent_pulse_params* pulse, const optoent_config* cfg,
                                                optoent_ensemble** out);
OPTOENT_API optoent_status optoent_ensemble_size(const optoent_ensemble* ens, size_t* out);
OPTOENT_API optoent_status optoent_ensemble_duan(const optoent_ensemble* ens, double phi, double* value,
                                                 double* standard_error);
OPTOENT_API optoent_status optoent_ensemble_covariance(const optoent_ensemble* ens, double entries[16],
                                                       double standard_errors[16]);
OPTOENT_API optoent_status optoent_ensemble_to_json(const optoent_ensemble* ens, char** out);
OPTOENT_API void optoent_ensemble_destroy(optoent_ensemble* ens);
/* One homodyne record (t, x_out, p_out) written as CSV. */
OPTOENT_API optoent_status optoent_record_write_csv(const optoent_system_params* params, double dt, double t_total,
                                                    unsigned long long seed, const char* path);

#ifdef __cplusplus
}
#endif

#endif
