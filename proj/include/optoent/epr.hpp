#pragma once

#include <complex>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "optoent/model.hpp"
#include "optoent/pulses.hpp"

namespace optoent {

enum class EprMethod {
    exact_quadrature,     // four-group frequency integral (resonant drive only)
    matrix_form,          // 2 + int v^H M v (resonant drive only)
    closed_form,          // adiabatic, slowly-decaying-envelope approximation
    covariance_assembly,  // Duan value of the assembled covariance (any detuning)
};

const char* method_name(EprMethod method);
// Accepts the names returned by method_name plus "exact". Throws ContractViolation.
EprMethod parse_method(const std::string& name);

struct EPRResult {
    double value = 0.0;
    double phi_used = 0.0;
    double gamma_used = 0.0;
    EprMethod method = EprMethod::exact_quadrature;
    bool entangled = false;       // value < 2, no tolerance band
    double margin = 0.0;          // 2 - value
    double error = 0.0;           // quadrature error estimate (0 for closed form)
    bool domain_warning = false;  // closed form used outside its accuracy domain
    bool phi_degenerate = false;  // set by optimizers when the phi dependence vanishes
};

// The EPR-variance depends on phi as value(phi) = base + 2 Re(e^{i phi} cross),
// where cross is the inter-mode correlator. Stored as the value at phi = 0
// because near-optimal angles then avoid cancelling the large intra- and
// inter-mode noise contributions against each other. Detection efficiency
// params.eta is already applied.
struct PhiDecomposition {
    double at_zero = 0.0;
    std::complex<double> cross{};
    double error = 0.0;
    bool domain_warning = false;

    double base() const { return at_zero - 2.0 * cross.real(); }
    double at(double phi) const;
    double minimum() const;
};

PhiDecomposition epr_components(const SystemParams& params, const PulseParams& pulse, EprMethod method);

// Hermitian kernel of the matrix form, built from D(omega) and P(omega).
Eigen::Matrix4cd epr_kernel_matrix(double omega, const SystemParams& params);
Eigen::Matrix4cd epr_kernel_matrix(const Freq& omega, const SystemParams& params);

// Evaluators at the pulse's phi. The quadrature evaluators require delta == 0
// and the momentum-only Brownian model, and throw NonConvergence when the
// error estimate stays above tolerance.
EPRResult epr_exact(const SystemParams& params, const PulseParams& pulse);
EPRResult epr_matrix_form(const SystemParams& params, const PulseParams& pulse);
EPRResult epr_closed_form(const SystemParams& params, const PulseParams& pulse);
EPRResult epr_evaluate(const SystemParams& params, const PulseParams& pulse, EprMethod method);

// True when gamma violates the slowly-decaying-envelope condition
// gamma << omega_m / sqrt(n_th (c_q + 1)) (checked with a factor 0.1).
bool closed_form_domain_violated(const SystemParams& params, double gamma);

// 2 (Gamma_ro + Gamma_th) + gamma_m / 2.
double gamma_opt(const SystemParams& params);

struct PhiOptimum {
    double phi = 0.0;
    bool degenerate = false;
};

// phi minimizing base + 2 Re(e^{i phi} c): pi - arg(c), wrapped to (-pi, pi].
PhiOptimum optimize_phi(std::complex<double> c);
PhiOptimum optimize_phi(const SystemParams& params, const PulseParams& pulse, EprMethod method);

struct GammaSearch {
    double lower_factor = 1.0;   // search range lower end, in units of gamma_m
    double upper_factor = 0.1;   // search range upper end, in units of kappa
    int golden_iterations = 60;
    bool optimize_phi = true;    // otherwise the fixed phi below is used
    double phi = 0.0;
};

// Minimizes the EPR-variance over log(gamma), seeded at gamma_opt, at the given
// pulse separation and efficiency (overriding params.eta). Throws
// NonConvergence when no bracketing triple exists in the search range.
EPRResult minimize_over_gamma(const SystemParams& params, EprMethod method, double t_sep, double eta,
                              const GammaSearch& search = {});

} // namespace optoent
