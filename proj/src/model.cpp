#include "optoent/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "optoent/error.hpp"

namespace optoent {

void validate(const SystemParams& p) {
    auto fail = [](const std::string& what) { throw ContractViolation("invalid SystemParams: " + what); };
    if (!(p.omega_m > 0.0) || !std::isfinite(p.omega_m)) fail("omega_m must be > 0");
    if (!(p.kappa > 0.0) || !std::isfinite(p.kappa)) fail("kappa must be > 0");
    if (!(p.gamma_m > 0.0) || !std::isfinite(p.gamma_m)) fail("gamma_m must be > 0");
    if (!(p.g >= 0.0) || !std::isfinite(p.g)) fail("g must be >= 0");
    if (!std::isfinite(p.delta)) fail("delta must be finite");
    if (!(p.n_th >= 0.0) || !std::isfinite(p.n_th)) fail("n_th must be >= 0");
    if (!(p.eta >= 0.0 && p.eta <= 1.0)) fail("eta must lie in [0, 1]");
}

SystemParams params_from_lab_units(double omega_m_hz, double kappa_over_omega_m, double q_factor,
                                   double n_th, double g_hz, double delta_over_kappa, double eta) {
    SystemParams p;
    p.omega_m = kTwoPi * omega_m_hz;
    p.kappa = kappa_over_omega_m * p.omega_m;
    p.gamma_m = p.omega_m / q_factor;
    p.g = kTwoPi * g_hz;
    p.delta = delta_over_kappa * p.kappa;
    p.n_th = n_th;
    p.eta = eta;
    validate(p);
    return p;
}

double coupling_for_cooperativity(const SystemParams& p, double c_q) {
    if (!(c_q >= 0.0)) throw ContractViolation("c_q must be >= 0");
    return std::sqrt(c_q * p.kappa * p.gamma_m * (p.n_th + 1.0) / 4.0);
}

SystemParams baseline_params() {
    return params_from_lab_units(1.0e6, 10.0, 1.0e8, 1.0e4, 0.0, 0.0, 1.0);
}

DerivedRates derive_rates(const SystemParams& p) {
    validate(p);
    DerivedRates r;
    const double g2 = p.g * p.g;
    r.gamma_ro = 4.0 * g2 / p.kappa;
    r.gamma_th = p.gamma_m * (p.n_th + 0.5);
    r.c_cl = 4.0 * g2 / (p.kappa * p.gamma_m);
    r.c_q = r.c_cl / (p.n_th + 1.0);
    r.q_factor = p.omega_m / p.gamma_m;
    return r;
}

Matrix4 drift_matrix(const SystemParams& p) {
    Matrix4 a = Matrix4::Zero();
    const double half_damping = p.brownian == BrownianModel::symmetric ? 0.5 * p.gamma_m : 0.0;
    a(0, 0) = -half_damping;
    a(0, 1) = p.omega_m;
    a(1, 0) = -p.omega_m;
    a(1, 1) = p.brownian == BrownianModel::symmetric ? -0.5 * p.gamma_m : -p.gamma_m;
    a(1, 2) = -2.0 * p.g;
    a(2, 2) = -0.5 * p.kappa;
    a(2, 3) = -p.delta;
    a(3, 0) = -2.0 * p.g;
    a(3, 2) = p.delta;
    a(3, 3) = -0.5 * p.kappa;
    return a;
}

Eigen::Matrix<double, 4, 4> noise_input_matrix(const SystemParams& p) {
    Eigen::Matrix<double, 4, 4> b = Eigen::Matrix<double, 4, 4>::Zero();
    const double sk = std::sqrt(p.kappa);
    b(2, 0) = sk;
    b(3, 1) = sk;
    if (p.brownian == BrownianModel::symmetric) {
        b(1, 2) = std::sqrt(p.gamma_m);
        b(0, 3) = std::sqrt(p.gamma_m);
    } else {
        b(1, 2) = std::sqrt(2.0 * p.gamma_m);
    }
    return b;
}

Eigen::Vector4d noise_intensities(const SystemParams& p) {
    return Eigen::Vector4d(0.5, 0.5, p.n_th + 0.5, p.n_th + 0.5);
}

std::array<double, 4> characteristic_polynomial(const Matrix4& a) {
    // Faddeev-LeVerrier recursion.
    std::array<double, 4> c{};
    Matrix4 m = Matrix4::Identity();
    for (int k = 1; k <= 4; ++k) {
        const Matrix4 am = a * m;
        c[k - 1] = -am.trace() / k;
        m = am + c[k - 1] * Matrix4::Identity();
    }
    return c;
}

bool routh_hurwitz_stable(const std::array<double, 4>& c) {
    const double a1 = c[0], a2 = c[1], a3 = c[2], a4 = c[3];
    if (!(a1 > 0.0 && a2 > 0.0 && a3 > 0.0 && a4 > 0.0)) return false;
    if (!(a1 * a2 - a3 > 0.0)) return false;
    return a1 * a2 * a3 - a3 * a3 - a1 * a1 * a4 > 0.0;
}

StabilityReport check_stability(const SystemParams& p) {
    validate(p);
    const Matrix4 a = drift_matrix(p);
    Eigen::EigenSolver<Matrix4> solver(a, false);
    const auto ev = solver.eigenvalues();

    StabilityReport report;
    double max_re = -std::numeric_limits<double>::infinity();
    double margin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 4; ++i) {
        report.drift_eigen_real_parts[i] = ev[i].real();
        max_re = std::max(max_re, ev[i].real());
        margin = std::min(margin, std::abs(ev[i].real()));
    }
    std::sort(report.drift_eigen_real_parts.begin(), report.drift_eigen_real_parts.end());
    const double max_rate = std::max({p.omega_m, p.kappa, p.gamma_m, p.g, std::abs(p.delta)});
    report.stable = max_re < -1e-12 * max_rate;
    report.margin = margin;
    report.routh_hurwitz_stable = routh_hurwitz_stable(characteristic_polynomial(a));
    if (report.stable != report.routh_hurwitz_stable) {
        std::ostringstream os;
        os << "eigenvalue and Routh-Hurwitz verdicts disagree (max Re lambda = " << max_re << ")";
        report.diagnostic = os.str();
    }
    return report;
}

void require_stable(const SystemParams& p) {
    const auto report = check_stability(p);
    if (!report.stable) {
        std::ostringstream os;
        os << "unstable drift: largest eigenvalue real part " << report.drift_eigen_real_parts[3] << " rad/s";
        throw UnstableSystem(os.str());
    }
}

} // namespace optoent
