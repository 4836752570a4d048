#include "optoent/epr.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "grid.hpp"
#include "minimize.hpp"
#include "optoent/error.hpp"
#include "optoent/gaussian.hpp"
#include "optoent/quadrature.hpp"
#include "optoent/spectral.hpp"

namespace optoent {

namespace {

constexpr cplx kI{0.0, 1.0};

constexpr double kAbsTol = 1e-9;

quad::Options spectral_options() {
    quad::Options opt;
    opt.abs_tol = kAbsTol;
    opt.rel_tol = 1e-11;
    opt.max_subdivisions = 20000;
    return opt;
}

// The cross term is large (up to ~n_th c_q) and its resonant peak is
// roundoff-limited near 1e-10 relative; it enters the optimum only through
// phi_opt, which is first-order insensitive to it.
quad::Options cross_options() {
    quad::Options opt = spectral_options();
    opt.rel_tol = 1e-9;
    return opt;
}

void require_resonant(const SystemParams& p, const char* who) {
    if (p.delta != 0.0)
        throw ContractViolation(std::string(who) + " requires a resonant drive (delta == 0); use covariance_assembly");
    if (p.brownian != BrownianModel::momentum_only)
        throw ContractViolation(std::string(who) + " requires the momentum-only Brownian model");
}

template <class T>
void check_converged(const quad::Result<T>& res, const char* who) {
    if (!res.converged)
        throw NonConvergence(std::string(who) + ": quadrature error estimate " + std::to_string(res.error) +
                             " exceeds tolerance after maximal refinement");
}

PhiDecomposition apply_efficiency(PhiDecomposition d, double eta) {
    d.at_zero = eta * d.at_zero + 2.0 * (1.0 - eta);
    d.cross *= eta;
    d.error *= eta;
    return d;
}

// Four integral groups: intra-mode shot/back-action/thermal, intra-mode
// shot x back-action, and the two inter-mode groups. The inter-mode terms are
// the only phi-dependent ones. The phi = 0 combination is integrated on its
// own so that the near-cancellation between intra- and inter-mode noise
// happens pointwise rather than between two large integrals.
PhiDecomposition exact_components(const SystemParams& p, const PulseParams& pulse) {
    require_resonant(p, "epr_exact");
    require_stable(p);
    const double wm = p.omega_m;
    auto groups = [&](const Freq& w, cplx& intra_part, cplx& inter_part) {
        const NoiseFactors plus = noise_factors_exact(w, p);
        const NoiseFactors minus = noise_factors_exact(-w, p);
        const double d = std::real(plus.b * minus.b + plus.t * minus.t);
        const cplx pb = minus.s * plus.b;
        const cplx fe = mode_freq(Mode::early, w, pulse);
        const cplx fl = mode_freq(Mode::late, w, pulse);
        const cplx fe_m = mode_freq(Mode::early, -w, pulse);
        const cplx fl_m = mode_freq(Mode::late, -w, pulse);
        const double intra = std::norm(fe) + std::norm(fl);
        intra_part = intra * (0.5 * plus.s * minus.s + d) + intra * kI * pb;
        inter_part = (fe_m * fl + fl_m * fe) * (-d + kI * pb);
    };
    // At phi = 0 the D-weighted intra- and inter-mode terms cancel near the
    // mechanical resonance. With f_L(-w) = f_E(w) their sum is
    // D (|f_E - conj f_L(-w)|^2 + |f_L - conj f_E(-w)|^2) / 2, which keeps
    // full precision there.
    auto at_zero = [&](double anchor, double offset) {
        const Freq w = Freq::rescaled(anchor, offset, wm);
        const NoiseFactors plus = noise_factors_exact(w, p);
        const NoiseFactors minus = noise_factors_exact(-w, p);
        const double d = std::real(plus.b * minus.b + plus.t * minus.t);
        const cplx pb = minus.s * plus.b;
        const cplx fe = mode_freq(Mode::early, w, pulse);
        const cplx fl = mode_freq(Mode::late, w, pulse);
        const cplx fe_m = mode_freq(Mode::early, -w, pulse);
        const cplx fl_m = mode_freq(Mode::late, -w, pulse);
        const double intra = std::norm(fe) + std::norm(fl);
        const cplx inter = fe_m * fl + fl_m * fe;
        const double anti = 0.5 * (std::norm(fe - std::conj(fl_m)) + std::norm(fl - std::conj(fe_m)));
        const double sym = 0.5 * (std::norm(fe + std::conj(fl_m)) + std::norm(fl + std::conj(fe_m)));
        const double shot = 0.5 * std::real(plus.s * minus.s) * intra;
        return wm * (shot + d * anti - pb.imag() * sym - pb.real() * inter.imag());
    };
    auto cross = [&](double anchor, double offset) {
        cplx a, b;
        groups(Freq::rescaled(anchor, offset, wm), a, b);
        return wm * b;
    };
    const auto r0 = detail::integrate_spectrum<double>(at_zero, p, pulse.gamma, spectral_options());
    check_converged(r0, "epr_exact");
    const auto r1 = detail::integrate_spectrum<cplx>(cross, p, pulse.gamma, cross_options());
    check_converged(r1, "epr_exact");
    PhiDecomposition d;
    d.at_zero = 2.0 * r0.value;
    d.cross = r1.value;
    d.error = 2.0 * r0.error;
    return d;
}

// 2 + int v^H M v with v = (f_E(w), f_L*(-w), f_E*(w), f_L(-w)). The form is
// real for every phi; its values at phi = 0, pi/2, pi determine the cross term.
PhiDecomposition matrix_components(const SystemParams& p, const PulseParams& pulse) {
    require_resonant(p, "epr_matrix_form");
    require_stable(p);
    const double wm = p.omega_m;
    auto form = [&](const Freq& w, double phi) {
        const Eigen::Matrix4cd m = epr_kernel_matrix(w, p);
        const cplx fe = mode_freq(Mode::early, w, pulse);
        const cplx fl_m = std::polar(1.0, phi) * mode_freq(Mode::late, -w, pulse);
        Eigen::Vector4cd v;
        v << fe, std::conj(fl_m), std::conj(fe), fl_m;
        return std::real(v.dot(m * v));
    };
    auto at_zero = [&](double anchor, double offset) { return wm * form(Freq::rescaled(anchor, offset, wm), 0.0); };
    auto cross = [&](double anchor, double offset) {
        const Freq w = Freq::rescaled(anchor, offset, wm);
        const double v0 = form(w, 0.0);
        const double v_half = form(w, 0.5 * std::numbers::pi);
        const double v_pi = form(w, std::numbers::pi);
        return Eigen::Vector2d(wm * 0.25 * (v0 - v_pi), wm * 0.25 * (v0 + v_pi - 2.0 * v_half));
    };
    const auto r0 = detail::integrate_spectrum<double>(at_zero, p, pulse.gamma, spectral_options());
    check_converged(r0, "epr_matrix_form");
    const auto r1 = detail::integrate_spectrum<Eigen::Vector2d>(cross, p, pulse.gamma, cross_options());
    check_converged(r1, "epr_matrix_form");
    PhiDecomposition d;
    d.at_zero = 2.0 + r0.value;
    d.cross = cplx(r1.value(0), r1.value(1));
    d.error = r0.error;
    return d;
}

// Adiabatic cavity, envelopes slow compared to the mechanical ringdown:
// value = 2 + 4 Gamma_ro / a [2 (Gamma_ro + Gamma_th)/gamma_m (1 - Gamma e cos phi / a)
//         - Gamma e cos phi / a], a = Gamma + gamma_m/2, e = exp(-gamma_m T / 2).
PhiDecomposition closed_components(const SystemParams& p, const PulseParams& pulse) {
    require_resonant(p, "epr_closed_form");
    const auto r = derive_rates(p);
    const double a = pulse.gamma + 0.5 * p.gamma_m;
    const double pre = 4.0 * r.gamma_ro / a;
    const double aut = 2.0 * (r.gamma_ro + r.gamma_th) / p.gamma_m;
    const double overlap = pulse.gamma * std::exp(-0.5 * p.gamma_m * pulse.t_sep) / a;
    PhiDecomposition d;
    d.cross = cplx(-0.5 * pre * (aut + 1.0) * overlap, 0.0);
    d.at_zero = 2.0 + pre * aut + 2.0 * d.cross.real();
    d.domain_warning = closed_form_domain_violated(p, pulse.gamma);
    return d;
}

PhiDecomposition covariance_components(const SystemParams& p, const PulseParams& pulse) {
    SystemParams lossless = p;
    lossless.eta = 1.0;
    const auto res = covariance_from_spectra(lossless, pulse);
    const auto dc = duan_components(res.cov);
    PhiDecomposition d;
    d.at_zero = dc.at_zero;
    d.cross = dc.cross;
    d.error = 4.0 * res.error;
    return d;
}

EPRResult make_result(const PhiDecomposition& d, double phi, double gamma, EprMethod method) {
    EPRResult r;
    r.value = d.at(phi);
    r.phi_used = phi;
    r.gamma_used = gamma;
    r.method = method;
    r.entangled = r.value < 2.0;
    r.margin = 2.0 - r.value;
    r.error = d.error;
    r.domain_warning = d.domain_warning;
    return r;
}

} // namespace

double PhiDecomposition::at(double phi) const {
    const double half = std::sin(0.5 * phi);
    return at_zero - 4.0 * half * half * cross.real() - 2.0 * std::sin(phi) * cross.imag();
}

double PhiDecomposition::minimum() const {
    // at_zero - 2 (|c| + Re c), rewritten for Re c < 0 where the two cancel.
    const double mag = std::abs(cross);
    const double gap = cross.real() < 0.0 ? cross.imag() * cross.imag() / (mag - cross.real()) : mag + cross.real();
    return at_zero - 2.0 * gap;
}

Eigen::Matrix4cd epr_kernel_matrix(double omega, const SystemParams& p) {
    return epr_kernel_matrix(Freq::at(omega, p.omega_m), p);
}

Eigen::Matrix4cd epr_kernel_matrix(const Freq& omega, const SystemParams& p) {
    const double d = auto_noise_density(omega, p);
    const cplx pb = shot_backaction_density(omega, p);
    const double pr = pb.real(), pi = pb.imag();
    Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
    m(0, 0) = d - pi;
    m(0, 1) = cplx(-d, -pr);
    m(1, 0) = cplx(-d, pr);
    m(1, 1) = d + pi;
    m(2, 2) = d - pi;
    m(2, 3) = cplx(-d, pr);
    m(3, 2) = cplx(-d, -pr);
    m(3, 3) = d + pi;
    return m;
}

const char* method_name(EprMethod method) {
    switch (method) {
    case EprMethod::exact_quadrature: return "exact_quadrature";
    case EprMethod::matrix_form: return "matrix_form";
    case EprMethod::closed_form: return "closed_form";
    case EprMethod::covariance_assembly: return "covariance_assembly";
    }
    return "unknown";
}

EprMethod parse_method(const std::string& name) {
    if (name == "exact" || name == "exact_quadrature") return EprMethod::exact_quadrature;
    if (name == "matrix_form" || name == "matrix") return EprMethod::matrix_form;
    if (name == "closed_form" || name == "closed") return EprMethod::closed_form;
    if (name == "covariance_assembly" || name == "covariance") return EprMethod::covariance_assembly;
    throw ContractViolation("unknown EPR method '" + name + "'");
}

bool closed_form_domain_violated(const SystemParams& p, double gamma) {
    const double cq = derive_rates(p).c_q;
    const double scale = p.n_th * (cq + 1.0);
    if (scale <= 0.0) return false;
    return gamma > 0.1 * p.omega_m / std::sqrt(scale);
}

PhiDecomposition epr_components(const SystemParams& params, const PulseParams& pulse, EprMethod method) {
    validate(params);
    validate(pulse);
    PhiDecomposition d;
    switch (method) {
    case EprMethod::exact_quadrature: d = exact_components(params, pulse); break;
    case EprMethod::matrix_form: d = matrix_components(params, pulse); break;
    case EprMethod::closed_form: d = closed_components(params, pulse); break;
    case EprMethod::covariance_assembly: d = covariance_components(params, pulse); break;
    }
    return apply_efficiency(d, params.eta);
}

EPRResult epr_evaluate(const SystemParams& params, const PulseParams& pulse, EprMethod method) {
    return make_result(epr_components(params, pulse, method), pulse.phi, pulse.gamma, method);
}

EPRResult epr_exact(const SystemParams& params, const PulseParams& pulse) {
    return epr_evaluate(params, pulse, EprMethod::exact_quadrature);
}

EPRResult epr_matrix_form(const SystemParams& params, const PulseParams& pulse) {
    return epr_evaluate(params, pulse, EprMethod::matrix_form);
}

EPRResult epr_closed_form(const SystemParams& params, const PulseParams& pulse) {
    return epr_evaluate(params, pulse, EprMethod::closed_form);
}

double gamma_opt(const SystemParams& params) {
    const auto r = derive_rates(params);
    return 2.0 * (r.gamma_ro + r.gamma_th) + 0.5 * params.gamma_m;
}

PhiOptimum optimize_phi(std::complex<double> c) {
    if (std::abs(c) == 0.0) return {0.0, true};
    double phi = std::numbers::pi - std::arg(c);
    if (phi > std::numbers::pi) phi -= 2.0 * std::numbers::pi;
    return {phi, false};
}

PhiOptimum optimize_phi(const SystemParams& params, const PulseParams& pulse, EprMethod method) {
    return optimize_phi(epr_components(params, pulse, method).cross);
}

EPRResult minimize_over_gamma(const SystemParams& params, EprMethod method, double t_sep, double eta,
                              const GammaSearch& search) {
    SystemParams p = params;
    p.eta = eta;
    validate(p);
    auto evaluate = [&](double log_gamma) {
        PulseParams pulse{std::exp(log_gamma), t_sep, 0.0};
        const auto d = epr_components(p, pulse, method);
        return search.optimize_phi ? d.minimum() : d.at(search.phi);
    };
    const auto best = detail::bracket_and_golden(evaluate, std::log(search.lower_factor * p.gamma_m),
                                                 std::log(search.upper_factor * p.kappa), std::log(gamma_opt(p)),
                                                 search.golden_iterations, "minimize_over_gamma");

    PulseParams pulse{std::exp(best.x), t_sep, 0.0};
    const auto d = epr_components(p, pulse, method);
    PhiOptimum phi{search.phi, false};
    if (search.optimize_phi) phi = optimize_phi(d.cross);
    EPRResult r = make_result(d, phi.phi, pulse.gamma, method);
    r.phi_degenerate = phi.degenerate;
    return r;
}

} // namespace optoent
