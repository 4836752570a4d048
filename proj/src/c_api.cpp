#include "optoent/optoent.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <new>
#include <sstream>
#include <string>

#include "optoent/config.hpp"
#include "optoent/epr.hpp"
#include "optoent/error.hpp"
#include "optoent/gaussian.hpp"
#include "optoent/montecarlo.hpp"
#include "optoent/spectral.hpp"
#include "optoent/sweep.hpp"

struct optoent_config {
    optoent::Config value;
};
struct optoent_covariance {
    optoent::CovarianceMatrix4 value;
};
struct optoent_table {
    optoent::SweepTable value;
};
struct optoent_ensemble {
    optoent::TrajectoryEnsemble value;
};

namespace {

using namespace optoent;

thread_local std::string g_last_error;

optoent_status fail(optoent_status s, const char* what) {
    g_last_error = what;
    return s;
}

// Runs f and converts exceptions into status codes.
template <class F>
optoent_status guarded(F&& f) {
    try {
        g_last_error.clear();
        f();
        return OPTOENT_OK;
    } catch (const UnstableSystem& e) {
        return fail(OPTOENT_ERR_UNSTABLE, e.what());
    } catch (const ContractViolation& e) {
        return fail(OPTOENT_ERR_CONTRACT, e.what());
    } catch (const NonConvergence& e) {
        return fail(OPTOENT_ERR_NONCONVERGENCE, e.what());
    } catch (const IoError& e) {
        return fail(OPTOENT_ERR_IO, e.what());
    } catch (const std::bad_alloc&) {
        return fail(OPTOENT_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(OPTOENT_ERR_INTERNAL, e.what());
    }
}

template <class T>
const T& need(const T* p, const char* name) {
    if (!p) throw ContractViolation(std::string(name) + " is null");
    return *p;
}

std::string need(const char* s, const char* name) {
    if (!s) throw ContractViolation(std::string(name) + " is null");
    return s;
}

template <class T>
T* need_out(T* p, const char* name) {
    if (!p) throw ContractViolation(std::string(name) + " output pointer is null");
    return p;
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

SystemParams to_cpp(const optoent_system_params* p) {
    const auto& c = need(p, "params");
    SystemParams s;
    s.omega_m = c.omega_m;
    s.kappa = c.kappa;
    s.gamma_m = c.gamma_m;
    s.g = c.g;
    s.delta = c.delta;
    s.n_th = c.n_th;
    s.eta = c.eta;
    if (c.brownian == OPTOENT_BROWNIAN_MOMENTUM_ONLY)
        s.brownian = BrownianModel::momentum_only;
    else if (c.brownian == OPTOENT_BROWNIAN_SYMMETRIC)
        s.brownian = BrownianModel::symmetric;
    else
        throw ContractViolation("unknown Brownian model code");
    return s;
}

optoent_system_params to_c(const SystemParams& s) {
    optoent_system_params c{};
    c.omega_m = s.omega_m;
    c.kappa = s.kappa;
    c.gamma_m = s.gamma_m;
    c.g = s.g;
    c.delta = s.delta;
    c.n_th = s.n_th;
    c.eta = s.eta;
    c.brownian = s.brownian == BrownianModel::symmetric ? OPTOENT_BROWNIAN_SYMMETRIC : OPTOENT_BROWNIAN_MOMENTUM_ONLY;
    return c;
}

PulseParams to_cpp(const optoent_pulse_params* p) {
    const auto& c = need(p, "pulse");
    return PulseParams{c.gamma, c.t_sep, c.phi};
}

EprMethod to_cpp(optoent_method m) {
    switch (m) {
    case OPTOENT_METHOD_EXACT: return EprMethod::exact_quadrature;
    case OPTOENT_METHOD_MATRIX_FORM: return EprMethod::matrix_form;
    case OPTOENT_METHOD_CLOSED_FORM: return EprMethod::closed_form;
    case OPTOENT_METHOD_COVARIANCE: return EprMethod::covariance_assembly;
    }
    throw ContractViolation("unknown EPR method code");
}

int to_c(EprMethod m) {
    switch (m) {
    case EprMethod::exact_quadrature: return OPTOENT_METHOD_EXACT;
    case EprMethod::matrix_form: return OPTOENT_METHOD_MATRIX_FORM;
    case EprMethod::closed_form: return OPTOENT_METHOD_CLOSED_FORM;
    case EprMethod::covariance_assembly: return OPTOENT_METHOD_COVARIANCE;
    }
    return -1;
}

optoent_epr_result to_c(const EPRResult& r) {
    optoent_epr_result c{};
    c.value = r.value;
    c.phi_used = r.phi_used;
    c.gamma_used = r.gamma_used;
    c.method = to_c(r.method);
    c.entangled = r.entangled;
    c.margin = r.margin;
    c.error = r.error;
    c.domain_warning = r.domain_warning;
    c.phi_degenerate = r.phi_degenerate;
    return c;
}

void copy_matrix(const Matrix4& m, double* out) {
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) out[4 * i + j] = m(i, j);
}

std::vector<SweepMethod> parse_methods(const char* list) {
    std::vector<SweepMethod> out;
    std::stringstream in(need(list, "methods"));
    std::string item;
    while (std::getline(in, item, ','))
        if (!item.empty()) out.push_back(parse_sweep_method(item));
    return out;
}

} // namespace

extern "C" {

const char* optoent_version(void) { return "1.0.0"; }

const char* optoent_last_error(void) { return g_last_error.c_str(); }

const char* optoent_status_name(optoent_status status) {
    switch (status) {
    case OPTOENT_OK: return "ok";
    case OPTOENT_ERR_INTERNAL: return "internal error";
    case OPTOENT_ERR_CONTRACT: return "contract violation";
    case OPTOENT_ERR_NONCONVERGENCE: return "non-convergence";
    case OPTOENT_ERR_UNSTABLE: return "unstable system";
    case OPTOENT_ERR_IO: return "i/o error";
    }
    return "unknown status";
}

void optoent_string_free(char* s) { std::free(s); }

optoent_status optoent_config_create(int with_defaults, optoent_config** out) {
    return guarded([&] { *need_out(out, "config") = new optoent_config{with_defaults ? default_config() : Config{}}; });
}

optoent_status optoent_config_load_file(const char* path, optoent_config** out) {
    return guarded([&] { *need_out(out, "config") = new optoent_config{load_config_file(need(path, "path"))}; });
}

optoent_status optoent_config_parse(const char* text, optoent_config** out) {
    return guarded([&] { *need_out(out, "config") = new optoent_config{parse_config(need(text, "text"))}; });
}

optoent_status optoent_config_set(optoent_config* cfg, const char* key, const char* value) {
    return guarded([&] {
        if (!cfg) throw ContractViolation("config is null");
        const Config single = parse_config(std::string(need(key, "key")) + " = " + need(value, "value"), "<set>");
        cfg->value = merge(cfg->value, single);
    });
}

optoent_status optoent_config_get(const optoent_config* cfg, const char* key, char** out) {
    return guarded([&] { *need_out(out, "value") = dup_string(need(cfg, "config").value.get(need(key, "key"))); });
}

optoent_status optoent_config_merge(const optoent_config* lower, const optoent_config* upper, optoent_config** out) {
    return guarded([&] {
        *need_out(out, "config") = new optoent_config{merge(need(lower, "lower").value, need(upper, "upper").value)};
    });
}

optoent_status optoent_config_to_text(const optoent_config* cfg, char** out) {
    return guarded([&] { *need_out(out, "text") = dup_string(to_text(need(cfg, "config").value)); });
}

optoent_status optoent_config_system(const optoent_config* cfg, optoent_system_params* out) {
    return guarded([&] {
        const Config c = merge(default_config(), need(cfg, "config").value);
        *need_out(out, "params") = to_c(system_params(c));
    });
}

optoent_status optoent_config_pulse(const optoent_config* cfg, const optoent_system_params* params,
                                    optoent_pulse_params* out) {
    return guarded([&] {
        const Config c = merge(default_config(), need(cfg, "config").value);
        const PulseParams p = pulse_params(c, to_cpp(params));
        *need_out(out, "pulse") = optoent_pulse_params{p.gamma, p.t_sep, p.phi};
    });
}

void optoent_config_destroy(optoent_config* cfg) { delete cfg; }

optoent_status optoent_baseline(optoent_system_params* out) {
    return guarded([&] { *need_out(out, "params") = to_c(baseline_params()); });
}

optoent_status optoent_derived_rates(const optoent_system_params* params, optoent_rates* out) {
    return guarded([&] {
        const SystemParams p = to_cpp(params);
        validate(p);
        const auto r = derive_rates(p);
        *need_out(out, "rates") = optoent_rates{r.gamma_ro, r.gamma_th, r.c_q, r.c_cl, r.q_factor};
    });
}

optoent_status optoent_coupling_for_cooperativity(const optoent_system_params* params, double c_q, double* g_out) {
    return guarded([&] { *need_out(g_out, "g") = coupling_for_cooperativity(to_cpp(params), c_q); });
}

optoent_status optoent_stability(const optoent_system_params* params, optoent_stability_report* out) {
    return guarded([&] {
        const auto r = check_stability(to_cpp(params));
        optoent_stability_report c{};
        for (int i = 0; i < 4; ++i) c.real_parts[i] = r.drift_eigen_real_parts[i];
        c.stable = r.stable;
        c.margin = r.margin;
        c.routh_hurwitz_stable = r.routh_hurwitz_stable;
        *need_out(out, "report") = c;
    });
}

optoent_status optoent_transfer(const optoent_system_params* params, double omega, double re[8], double im[8]) {
    return guarded([&] {
        need_out(re, "re");
        need_out(im, "im");
        const auto t = transfer_detuned(omega, to_cpp(params));
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 4; ++j) {
                re[4 * i + j] = t.m(i, j).real();
                im[4 * i + j] = t.m(i, j).imag();
            }
    });
}

optoent_status optoent_gamma_opt(const optoent_system_params* params, double* out) {
    return guarded([&] { *need_out(out, "gamma") = gamma_opt(to_cpp(params)); });
}

optoent_status optoent_epr_evaluate(const optoent_system_params* params, const optoent_pulse_params* pulse,
                                    optoent_method method, optoent_epr_result* out) {
    return guarded([&] { *need_out(out, "result") = to_c(epr_evaluate(to_cpp(params), to_cpp(pulse), to_cpp(method))); });
}

optoent_status optoent_epr_optimize_phi(const optoent_system_params* params, const optoent_pulse_params* pulse,
                                        optoent_method method, optoent_epr_result* out) {
    return guarded([&] {
        PulseParams p = to_cpp(pulse);
        const SystemParams s = to_cpp(params);
        const auto d = epr_components(s, p, to_cpp(method));
        const auto opt = optimize_phi(d.cross);
        p.phi = opt.phi;
        EPRResult r = epr_evaluate(s, p, to_cpp(method));
        r.phi_degenerate = opt.degenerate;
        *need_out(out, "result") = to_c(r);
    });
}

optoent_status optoent_epr_minimize(const optoent_system_params* params, optoent_method method, double t_sep,
                                    int optimize, double phi, optoent_epr_result* out) {
    return guarded([&] {
        const SystemParams s = to_cpp(params);
        GammaSearch search;
        search.optimize_phi = optimize != 0;
        search.phi = phi;
        *need_out(out, "result") = to_c(minimize_over_gamma(s, to_cpp(method), t_sep, s.eta, search));
    });
}

optoent_status optoent_covariance_from_spectra(const optoent_system_params* params, const optoent_pulse_params* pulse,
                                               optoent_covariance** out) {
    return guarded([&] {
        *need_out(out, "covariance") = new optoent_covariance{covariance_from_spectra(to_cpp(params), to_cpp(pulse)).cov};
    });
}

optoent_status optoent_covariance_from_entries(const double entries[16], optoent_covariance** out) {
    return guarded([&] {
        need(entries, "entries");
        Matrix4 m;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) m(i, j) = entries[4 * i + j];
        if (!m.allFinite()) throw ContractViolation("covariance entries must be finite");
        if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, m.cwiseAbs().maxCoeff()))
            throw ContractViolation("covariance entries must be symmetric");
        *need_out(out, "covariance") = new optoent_covariance{CovarianceMatrix4(m)};
    });
}

optoent_status optoent_covariance_two_mode_squeezed(double r, optoent_covariance** out) {
    return guarded([&] { *need_out(out, "covariance") = new optoent_covariance{two_mode_squeezed(r)}; });
}

optoent_status optoent_covariance_witness_scan(const optoent_system_params* params, double t_sep, double* gamma_out,
                                               optoent_covariance** out) {
    return guarded([&] {
        need_out(out, "covariance");
        const auto scan = minimize_witness_over_gamma(to_cpp(params), t_sep);
        if (gamma_out) *gamma_out = scan.gamma;
        *out = new optoent_covariance{scan.cov};
    });
}

optoent_status optoent_covariance_entries(const optoent_covariance* cov, double entries[16]) {
    return guarded([&] { copy_matrix(need(cov, "covariance").value.xi(), need_out(entries, "entries")); });
}

optoent_status optoent_covariance_duan(const optoent_covariance* cov, double phi, double* out) {
    return guarded([&] { *need_out(out, "value") = duan_value(need(cov, "covariance").value, phi); });
}

optoent_status optoent_covariance_optimal_phi(const optoent_covariance* cov, double* out) {
    return guarded([&] { *need_out(out, "phi") = optimize_phi(need(cov, "covariance").value).phi; });
}

optoent_status optoent_covariance_ppt(const optoent_covariance* cov, int* entangled) {
    return guarded([&] {
        *need_out(entangled, "verdict") = ppt_check(need(cov, "covariance").value) == PptVerdict::entangled;
    });
}

optoent_status optoent_covariance_log_negativity(const optoent_covariance* cov, double* out) {
    return guarded([&] { *need_out(out, "value") = log_negativity(need(cov, "covariance").value); });
}

optoent_status optoent_covariance_symplectic(const optoent_covariance* cov, int transposed, double nu[2]) {
    return guarded([&] {
        const auto s = symplectic_spectrum(need(cov, "covariance").value, transposed != 0);
        need_out(nu, "nu");
        nu[0] = s.nu_minus;
        nu[1] = s.nu_plus;
    });
}

optoent_status optoent_covariance_witness(const optoent_covariance* cov, double* out) {
    return guarded([&] { *need_out(out, "value") = optimal_witness(need(cov, "covariance").value).value; });
}

optoent_status optoent_covariance_physical(const optoent_covariance* cov, int* physical) {
    return guarded([&] { *need_out(physical, "physical") = is_physical(need(cov, "covariance").value); });
}

optoent_status optoent_covariance_to_json(const optoent_covariance* cov, int late_first, char** out) {
    return guarded([&] {
        *need_out(out, "json") = dup_string(covariance_to_json(need(cov, "covariance").value, late_first != 0));
    });
}

void optoent_covariance_destroy(optoent_covariance* cov) { delete cov; }

optoent_status optoent_grid(double min, double max, int count, int log_spacing, double* out) {
    return guarded([&] {
        need_out(out, "points");
        const auto v = log_spacing ? log_points(min, max, count) : linear_points(min, max, count);
        std::copy(v.begin(), v.end(), out);
    });
}

optoent_status optoent_sweep_run(const optoent_config* cfg, const char* axis, const double* points, size_t n_points,
                                 const char* methods, optoent_table** out) {
    return guarded([&] {
        need_out(out, "table");
        SweepSpec spec;
        spec.axis = parse_axis(need(axis, "axis"));
        if (n_points > 0) spec.points.assign(&need(points, "points"), points + n_points);
        spec.methods = parse_methods(methods);
        *out = new optoent_table{run_sweep(need(cfg, "config").value, spec)};
    });
}

optoent_status optoent_figure_run(const char* name, const optoent_config* overrides, optoent_table** out) {
    return guarded([&] {
        need_out(out, "table");
        const Config upper = overrides ? overrides->value : Config{};
        *out = new optoent_table{run_preset(figure_preset(need(name, "name")), upper)};
    });
}

optoent_status optoent_table_rows(const optoent_table* table, size_t* out) {
    return guarded([&] { *need_out(out, "rows") = need(table, "table").value.rows.size(); });
}

optoent_status optoent_table_value(const optoent_table* table, size_t row, const char* column, double* out) {
    return guarded([&] {
        const auto& t = need(table, "table").value;
        if (row >= t.rows.size()) throw ContractViolation("row index out of range");
        *need_out(out, "value") = t.at(row, need(column, "column"));
    });
}

optoent_status optoent_table_error(const optoent_table* table, size_t row, char** out) {
    return guarded([&] {
        const auto& t = need(table, "table").value;
        if (row >= t.rows.size()) throw ContractViolation("row index out of range");
        *need_out(out, "error") = dup_string(t.rows[row].error);
    });
}

optoent_status optoent_table_to_csv(const optoent_table* table, const char* timestamp, char** out) {
    return guarded([&] {
        *need_out(out, "csv") = dup_string(table_to_csv(need(table, "table").value, timestamp ? timestamp : ""));
    });
}

optoent_status optoent_table_to_json(const optoent_table* table, const char* timestamp, char** out) {
    return guarded([&] {
        *need_out(out, "json") = dup_string(table_to_json(need(table, "table").value, timestamp ? timestamp : ""));
    });
}

void optoent_table_destroy(optoent_table* table) { delete table; }

optoent_status optoent_ensemble_run(const optoent_system_params* params, const optoent_pulse_params* pulse,
                                    const optoent_config* cfg, optoent_ensemble** out) {
    return guarded([&] {
        need_out(out, "ensemble");
        const Config c = merge(default_config(), cfg ? cfg->value : Config{});
        *out = new optoent_ensemble{run_ensemble(to_cpp(params), to_cpp(pulse), ensemble_options(c))};
    });
}

optoent_status optoent_ensemble_size(const optoent_ensemble* ens, size_t* out) {
    return guarded([&] { *need_out(out, "size") = need(ens, "ensemble").value.samples.size(); });
}

optoent_status optoent_ensemble_duan(const optoent_ensemble* ens, double phi, double* value, double* standard_error) {
    return guarded([&] {
        const auto e = estimate_duan(need(ens, "ensemble").value, phi);
        *need_out(value, "value") = e.value;
        if (standard_error) *standard_error = e.standard_error;
    });
}

optoent_status optoent_ensemble_covariance(const optoent_ensemble* ens, double entries[16], double standard_errors[16]) {
    return guarded([&] {
        const auto e = estimate_covariance(need(ens, "ensemble").value);
        copy_matrix(e.cov.xi(), need_out(entries, "entries"));
        if (standard_errors) copy_matrix(e.standard_error, standard_errors);
    });
}

optoent_status optoent_ensemble_to_json(const optoent_ensemble* ens, char** out) {
    return guarded([&] { *need_out(out, "json") = dup_string(ensemble_to_json(need(ens, "ensemble").value)); });
}

void optoent_ensemble_destroy(optoent_ensemble* ens) { delete ens; }

optoent_status optoent_record_write_csv(const optoent_system_params* params, double dt, double t_total,
                                        unsigned long long seed, const char* path) {
    return guarded([&] {
        const auto rec = simulate_record(to_cpp(params), dt, t_total, seed);
        write_record_csv(rec, need(path, "path"));
    });
}

} // extern "C"
