#include "optoent/pulses.hpp"

#include <cmath>
#include <limits>
#include <vector>
#include <numbers>

#include "optoent/error.hpp"
#include "optoent/quadrature.hpp"

namespace optoent {

using cplx = std::complex<double>;

void validate(const PulseParams& pulse) {
    if (!(pulse.gamma > 0.0) || !std::isfinite(pulse.gamma))
        throw ContractViolation("invalid PulseParams: gamma must be > 0");
    if (!(pulse.t_sep >= 0.0) || !std::isfinite(pulse.t_sep))
        throw ContractViolation("invalid PulseParams: t_sep must be >= 0");
    if (!std::isfinite(pulse.phi)) throw ContractViolation("invalid PulseParams: phi must be finite");
}

cplx mode_time(Mode which, double t, const SystemParams& params, const PulseParams& pulse) {
    const double half_sep = 0.5 * pulse.t_sep;
    const double amp = std::sqrt(2.0 * pulse.gamma);
    if (which == Mode::early) {
        if (t > -half_sep) return {0.0, 0.0};
        return amp * std::exp(pulse.gamma * (t + half_sep)) * std::polar(1.0, -params.omega_m * t);
    }
    if (t < half_sep) return {0.0, 0.0};
    return amp * std::exp(-pulse.gamma * (t - half_sep)) * std::polar(1.0, params.omega_m * t);
}

cplx mode_freq(Mode which, double omega, const SystemParams& params, const PulseParams& pulse) {
    return mode_freq(which, Freq::at(omega, params.omega_m), pulse);
}

cplx mode_freq(Mode which, const Freq& w, const PulseParams& pulse) {
    // e^{i omega_m T/2} e^{-+i w T/2} is written through the sideband distance.
    const double norm = std::sqrt(pulse.gamma / std::numbers::pi);
    const double half_sep = 0.5 * pulse.t_sep;
    if (which == Mode::early) {
        const cplx num = cplx(0.0, -norm) * std::polar(1.0, -w.minus_wm * half_sep);
        return num / cplx(w.minus_wm, -pulse.gamma);
    }
    const cplx num = cplx(0.0, norm) * std::polar(1.0, w.plus_wm * half_sep);
    return num / cplx(w.plus_wm, pulse.gamma);
}

Support mode_support(Mode which, const PulseParams& pulse) {
    const double half_sep = 0.5 * pulse.t_sep;
    if (which == Mode::early) return {-std::numeric_limits<double>::infinity(), -half_sep};
    return {half_sep, std::numeric_limits<double>::infinity()};
}

cplx overlap(Mode i, Mode j, const SystemParams& params, const PulseParams& pulse) {
    validate(pulse);
    if (i != j) {
        // Supports are disjoint, or touch in a single point when t_sep = 0.
        return {0.0, 0.0};
    }
    const Support s = mode_support(i, pulse);
    auto integrand = [&](double t) { return mode_time(i, t, params, pulse) * std::conj(mode_time(j, t, params, pulse)); };
    quad::Options opt;
    opt.abs_tol = 1e-14;
    opt.rel_tol = 1e-13;
    const double scale = 1.0 / pulse.gamma;
    if (i == Mode::early) {
        auto mirrored = [&](double u) { return integrand(-u); };
        return quad::integrate_to_infinity<cplx>(mirrored, -s.end, scale, opt).value;
    }
    return quad::integrate_to_infinity<cplx>(integrand, s.begin, scale, opt).value;
}

cplx overlap_freq(Mode i, Mode j, const SystemParams& params, const PulseParams& pulse) {
    validate(pulse);
    auto integrand = [&](double w) {
        return mode_freq(i, w, params, pulse) * std::conj(mode_freq(j, w, params, pulse));
    };
    std::vector<double> pts{0.0};
    for (double sign : {-1.0, 1.0})
        for (double k : {0.0, 1.0, 3.0, 10.0, 30.0}) {
            pts.push_back(sign * params.omega_m + k * pulse.gamma);
            pts.push_back(sign * params.omega_m - k * pulse.gamma);
        }
    if (pulse.t_sep > 0.0) {
        // Resolve the e^{-i w T} oscillation with panels of one period.
        const double period = 2.0 * std::numbers::pi / pulse.t_sep;
        const double reach = params.omega_m + 60.0 * pulse.gamma;
        for (double w = -reach; w <= reach && pts.size() < 20000; w += period) pts.push_back(w);
    }
    quad::Options opt;
    opt.abs_tol = 1e-13;
    opt.rel_tol = 1e-12;
    opt.max_subdivisions = 20000;
    return quad::integrate_line<cplx>(integrand, pts, opt).value;
}

} // namespace optoent
