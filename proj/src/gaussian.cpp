#include "optoent/gaussian.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include <json.hpp>

#include "grid.hpp"
#include "minimize.hpp"
#include "optoent/error.hpp"
#include "optoent/quadrature.hpp"
#include "optoent/spectral.hpp"

namespace optoent {

namespace {

using Mat2 = Eigen::Matrix2d;

constexpr double kPhysicalTolerance = 1e-8;

Mat2 rotation(double theta) {
    Mat2 r;
    r << std::cos(theta), std::sin(theta), -std::sin(theta), std::cos(theta);
    return r;
}

Mat2 squeeze(double s) {
    Mat2 q = Mat2::Zero();
    q(0, 0) = std::exp(s);
    q(1, 1) = std::exp(-s);
    return q;
}

Matrix4 direct_sum(const Mat2& a, const Mat2& b) {
    Matrix4 m = Matrix4::Zero();
    m.topLeftCorner<2, 2>() = a;
    m.bottomRightCorner<2, 2>() = b;
    return m;
}

// Local symplectic bringing a 2x2 positive block to a multiple of the identity.
Mat2 normalize_block(const Mat2& a) {
    Eigen::SelfAdjointEigenSolver<Mat2> es(a);
    const Mat2 inv_sqrt = es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                          es.eigenvectors().transpose();
    return std::pow(a.determinant(), 0.25) * inv_sqrt;
}

// Proper rotations u, v with u c v^T diagonal.
void rotation_svd(const Mat2& c, Mat2& u, Mat2& v) {
    Eigen::JacobiSVD<Mat2> svd(c, Eigen::ComputeFullU | Eigen::ComputeFullV);
    u = svd.matrixU().transpose();
    v = svd.matrixV().transpose();
    if (u.determinant() < 0) u.row(1) *= -1.0;
    if (v.determinant() < 0) v.row(1) *= -1.0;
}

struct DuanFrame {
    Matrix4 transform;  // local symplectic applied before the Duan test
    double beta;        // balance a = e^beta
};

// Scaled Duan functional: 2/(a^2 + a^-2) * (u^T Xi u + v^T Xi v)/2 with
// u = (a, 0, 1/a, 0) and v = (0, a, 0, -1/a).
Matrix4 duan_kernel(double beta) {
    const double a = std::exp(beta);
    Eigen::Vector4d u(a, 0.0, 1.0 / a, 0.0);
    Eigen::Vector4d v(0.0, a, 0.0, -1.0 / a);
    const double k = 2.0 / (a * a + 1.0 / (a * a));
    return 0.5 * k * (u * u.transpose() + v * v.transpose());
}

Matrix4 witness_matrix(const DuanFrame& f) { return f.transform.transpose() * duan_kernel(f.beta) * f.transform; }

double witness_value(const Matrix4& xi, const DuanFrame& f) { return (witness_matrix(f) * xi).trace(); }

template <class F>
double golden_minimize(const F& f, double lo, double hi, double& x_best) {
    const double ratio = 0.5 * (3.0 - std::sqrt(5.0));
    double a = lo, b = hi;
    double x1 = a + ratio * (b - a), x2 = b - ratio * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 80 && b - a > 1e-12; ++it) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1, f2 = f1;
            x1 = a + ratio * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2, f1 = f2;
            x2 = b - ratio * (b - a);
            f2 = f(x2);
        }
    }
    x_best = f1 <= f2 ? x1 : x2;
    return std::min(f1, f2);
}

} // namespace

CovarianceMatrix4::CovarianceMatrix4(const Matrix4& xi) : xi_(0.5 * (xi + xi.transpose())) {}

Matrix4 symplectic_form() {
    Mat2 j;
    j << 0.0, 1.0, -1.0, 0.0;
    return direct_sum(j, j);
}

CovarianceMatrix4 vacuum_covariance() { return CovarianceMatrix4(Matrix4::Identity()); }

CovarianceMatrix4 thermal_covariance(double variance) {
    return CovarianceMatrix4(variance * Matrix4::Identity());
}

CovarianceMatrix4 two_mode_squeezed(double r) {
    const double c = std::cosh(2.0 * r), s = std::sinh(2.0 * r);
    Matrix4 xi;
    xi << c, 0, -s, 0,
          0, c, 0, s,
          -s, 0, c, 0,
          0, s, 0, c;
    return CovarianceMatrix4(xi);
}

Matrix4 swap_mode_order(const Matrix4& xi) {
    Eigen::PermutationMatrix<4> perm;
    perm.indices() << 2, 3, 0, 1;
    return perm * xi * perm.transpose();
}

CovarianceMatrix4 partial_transpose(const CovarianceMatrix4& cov) {
    const Eigen::Vector4d flip(1.0, 1.0, 1.0, -1.0);
    return CovarianceMatrix4(flip.asDiagonal() * cov.xi() * flip.asDiagonal());
}

double physicality_margin(const Matrix4& xi, double x) {
    const Eigen::Matrix4cd h = xi.cast<cplx>() + cplx(0.0, x) * symplectic_form().cast<cplx>();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

bool is_physical(const CovarianceMatrix4& cov, double tolerance) {
    return physicality_margin(cov.xi()) >= -tolerance;
}

void require_physical(const CovarianceMatrix4& cov, const char* who) {
    const double margin = physicality_margin(cov.xi());
    if (!(margin >= -kPhysicalTolerance))
        throw ContractViolation(std::string(who) + ": unphysical covariance (min eigenvalue of Xi + i sigma is " +
                                std::to_string(margin) + ")");
}

CovarianceResult covariance_from_spectra(const SystemParams& params, const PulseParams& pulse) {
    validate(params);
    validate(pulse);
    const TransferFunction transfer(params);
    const Eigen::Vector4d n = noise_intensities(params);
    const double wm = params.omega_m;

    auto weights = [&](const Freq& w) {
        // Columns x_E, p_E, x_L, p_L acting on (x_out, p_out).
        Eigen::Matrix<cplx, 2, 4> wt;
        int col = 0;
        for (Mode m : {Mode::early, Mode::late}) {
            const cplx f = mode_freq(m, w, pulse);
            const cplx f_mirror = std::conj(mode_freq(m, -w, pulse));
            const cplx f_re = 0.5 * (f + f_mirror);
            const cplx f_im = (f - f_mirror) / cplx(0.0, 2.0);
            wt(0, col) = f_re;
            wt(1, col) = -f_im;
            wt(0, col + 1) = f_im;
            wt(1, col + 1) = f_re;
            col += 2;
        }
        return wt;
    };
    auto integrand = [&](double anchor, double offset) {
        const Freq w = Freq::rescaled(anchor, offset, wm);
        const auto t = transfer(w).m;
        const auto wt = weights(w);
        const Eigen::Matrix<cplx, 4, 4> proj = wt.adjoint() * t;
        return Eigen::Matrix4cd(wm * proj * n.cast<cplx>().asDiagonal() * proj.adjoint());
    };
    quad::Options opt;
    // Entries grow like n_th c_q while the Duan combination stays O(1), so
    // the relative tolerance is set well below the required absolute accuracy.
    opt.abs_tol = 1e-10;
    opt.rel_tol = 1e-12;
    opt.max_subdivisions = 20000;
    const auto res = detail::integrate_spectrum<Eigen::Matrix4cd>(integrand, params, pulse.gamma, opt);
    if (!res.converged)
        throw NonConvergence("covariance_from_spectra: quadrature did not converge at gamma = " +
                             std::to_string(pulse.gamma) + " rad/s (error estimate " + std::to_string(2.0 * res.error) +
                             ")");
    Matrix4 xi = 2.0 * res.value.real();
    xi = params.eta * xi + (1.0 - params.eta) * Matrix4::Identity();
    return {CovarianceMatrix4(xi), 2.0 * res.error};
}

DuanComponents duan_components(const CovarianceMatrix4& cov) {
    const Matrix4& x = cov.xi();
    DuanComponents d;
    d.cross = 0.5 * cplx(x(0, 2) - x(1, 3), x(0, 3) + x(1, 2));
    d.at_zero = 0.5 * (x(0, 0) + x(1, 1) + x(2, 2) + x(3, 3)) + x(0, 2) - x(1, 3);
    return d;
}

double duan_value(const CovarianceMatrix4& cov, double phi) {
    const auto d = duan_components(cov);
    const double half = std::sin(0.5 * phi);
    return d.at_zero - 4.0 * half * half * d.cross.real() - 2.0 * std::sin(phi) * d.cross.imag();
}

PhiOptimum optimize_phi(const CovarianceMatrix4& cov) { return optimize_phi(duan_components(cov).cross); }

const char* verdict_name(PptVerdict verdict) {
    return verdict == PptVerdict::entangled ? "entangled" : "separable-consistent";
}

PptVerdict ppt_check(const CovarianceMatrix4& cov) {
    require_physical(cov, "ppt_check");
    const double margin = physicality_margin(partial_transpose(cov).xi());
    return margin < -kPhysicalTolerance ? PptVerdict::entangled : PptVerdict::separable_consistent;
}

namespace {

// Local standard form: A = a I, B = b I, C = diag(c1, c2).
struct StandardForm {
    double a, b, c1, c2;
};

bool standard_form(const Matrix4& x, StandardForm& sf) {
    const Mat2 a = x.topLeftCorner<2, 2>(), b = x.bottomRightCorner<2, 2>();
    if (!(a(0, 0) > 0.0 && a.determinant() > 0.0 && b(0, 0) > 0.0 && b.determinant() > 0.0)) return false;
    const Mat2 na = normalize_block(a), nb = normalize_block(b);
    const Mat2 c = na * x.topRightCorner<2, 2>() * nb.transpose();
    Mat2 u, v;
    rotation_svd(c, u, v);
    const Mat2 d = u * c * v.transpose();
    sf = {std::sqrt(a.determinant()), std::sqrt(b.determinant()), d(0, 0), d(1, 1)};
    return true;
}

SymplecticSpectrum spectrum_from_invariants(const Matrix4& x, bool transposed) {
    const double det_a = x.topLeftCorner<2, 2>().determinant();
    const double det_b = x.bottomRightCorner<2, 2>().determinant();
    const double det_c = x.topRightCorner<2, 2>().determinant();
    const double invariant = det_a + det_b + (transposed ? -2.0 : 2.0) * det_c;
    const double det = x.determinant();
    const double disc = std::sqrt(std::max(0.0, invariant * invariant - 4.0 * det));
    const double plus2 = 0.5 * (invariant + disc);
    const double minus2 = plus2 > 0.0 ? det / plus2 : 0.0;
    return {std::sqrt(std::max(0.0, minus2)), std::sqrt(std::max(0.0, plus2))};
}

} // namespace

SymplecticSpectrum symplectic_spectrum(const CovarianceMatrix4& cov, bool transposed) {
    // Strongly correlated states have entries far above their symplectic
    // eigenvalues; the generic invariants then cancel catastrophically, so the
    // invariants are rebuilt from the standard form in factored form.
    StandardForm sf{};
    if (!standard_form(cov.xi(), sf)) return spectrum_from_invariants(cov.xi(), transposed);
    const double a = sf.a, b = sf.b, c1 = sf.c1;
    const double c2 = transposed ? -sf.c2 : sf.c2;
    const double root = std::sqrt(a * b);
    const double d1 = root - std::abs(c1), p1 = root + std::abs(c1);
    const double d2 = root - std::abs(c2), p2 = root + std::abs(c2);
    const double det = d1 * p1 * d2 * p2;
    // Delta = a^2 + b^2 + 2 c1 c2.
    const double delta = c1 * c2 >= 0.0 ? a * a + b * b + 2.0 * c1 * c2 : (a - b) * (a - b) + d1 * p2 + d2 * p1;
    // Delta^2 - 4 det = (a^2 - b^2)^2 + 4 (a c1 + b c2)(a c2 + b c1).
    const double s = c1 + c2;
    const double disc = (a * a - b * b) * (a * a - b * b) + 4.0 * (a * s + (b - a) * c2) * (a * s + (b - a) * c1);
    const double plus2 = 0.5 * (delta + std::sqrt(std::max(0.0, disc)));
    const double minus2 = plus2 > 0.0 ? det / plus2 : 0.0;
    return {std::sqrt(std::max(0.0, minus2)), std::sqrt(std::max(0.0, plus2))};
}

double log_negativity(const CovarianceMatrix4& cov) {
    require_physical(cov, "log_negativity");
    return std::max(0.0, -std::log(symplectic_spectrum(cov, true).nu_minus));
}

WitnessResult optimal_witness(const CovarianceMatrix4& cov) {
    require_physical(cov, "optimal_witness");
    const Matrix4& xi = cov.xi();

    // Seed 1: the Duan test in the original frame at the optimal phi.
    const PhiOptimum phi = optimize_phi(cov);
    DuanFrame best{direct_sum(Mat2::Identity(), rotation(phi.phi)), 0.0};
    double best_value = witness_value(xi, best);

    // Seed 2: standard form with equal local blocks and diagonal correlations,
    // followed by a search over local squeezing and the balance.
    const Mat2 na = normalize_block(xi.topLeftCorner<2, 2>());
    const Mat2 nb = normalize_block(xi.bottomRightCorner<2, 2>());
    const Mat2 c = na * xi.topRightCorner<2, 2>() * nb.transpose();
    Mat2 u, v;
    rotation_svd(c, u, v);
    const Matrix4 standard = direct_sum(u * na, v * nb);

    bool converged = true;
    for (int quarter = 0; quarter < 4; ++quarter) {
        const Matrix4 oriented = direct_sum(Mat2::Identity(), rotation(0.5 * std::numbers::pi * quarter)) * standard;
        std::array<double, 3> z{0.0, 0.0, 0.0};  // s_E, s_L, beta
        auto frame = [&](const std::array<double, 3>& p) {
            return DuanFrame{direct_sum(squeeze(p[0]), squeeze(p[1])) * oriented, p[2]};
        };
        double current = witness_value(xi, frame(z));
        int sweep = 0;
        for (; sweep < 400; ++sweep) {
            const double before = current;
            for (int k = 0; k < 3; ++k) {
                auto along = [&](double t) {
                    auto trial = z;
                    trial[k] = t;
                    return witness_value(xi, frame(trial));
                };
                double arg = z[k];
                const double val = golden_minimize(along, z[k] - 3.0, z[k] + 3.0, arg);
                if (val < current) {
                    current = val;
                    z[k] = arg;
                }
            }
            if (before - current <= 1e-15 * std::max(1.0, std::abs(current))) break;
        }
        if (sweep == 400) converged = false;
        if (current < best_value) {
            best_value = current;
            best = frame(z);
        }
    }

    WitnessResult r;
    r.x_matrix = witness_matrix(best);
    r.value = (r.x_matrix * xi).trace();
    r.family = "local symplectic (rotation + squeeze per mode) x Duan pair with balance a; threshold 2";
    r.converged = converged;
    return r;
}

WitnessScan minimize_witness_over_gamma(const SystemParams& params, double t_sep, const GammaSearch& search) {
    validate(params);
    auto evaluate = [&](double log_gamma) {
        const auto res = covariance_from_spectra(params, PulseParams{std::exp(log_gamma), t_sep, 0.0});
        return optimal_witness(res.cov).value;
    };
    const auto best = detail::bracket_and_golden(evaluate, std::log(search.lower_factor * params.gamma_m),
                                                 std::log(search.upper_factor * params.kappa),
                                                 std::log(gamma_opt(params)), search.golden_iterations,
                                                 "minimize_witness_over_gamma");
    WitnessScan scan;
    scan.gamma = std::exp(best.x);
    scan.cov = covariance_from_spectra(params, PulseParams{scan.gamma, t_sep, 0.0}).cov;
    scan.witness = optimal_witness(scan.cov);
    return scan;
}

ShotNoiseReport shot_noise_sensitivity(const CovarianceMatrix4& cov, double x_scale) {
    if (!(x_scale > 0.0)) throw ContractViolation("shot_noise_sensitivity: x_scale must be > 0");
    ShotNoiseReport r;
    r.physical_at_x = physicality_margin(cov.xi(), x_scale) >= -kPhysicalTolerance;
    r.ppt_at_x = physicality_margin(partial_transpose(cov).xi(), x_scale) >= -kPhysicalTolerance;
    return r;
}

int symplectic_rank(const CovarianceMatrix4& cov) {
    require_physical(cov, "symplectic_rank");
    const auto nu = symplectic_spectrum(cov, false);
    int unit = 0;
    for (double v : {nu.nu_minus, nu.nu_plus})
        if (std::abs(v - 1.0) <= 1e-6) ++unit;
    return 2 - unit;
}

std::string covariance_to_json(const CovarianceMatrix4& cov, bool late_first) {
    const Matrix4 m = late_first ? swap_mode_order(cov.xi()) : cov.xi();
    nlohmann::json entries = nlohmann::json::array();
    for (int i = 0; i < 4; ++i)
        for (int j = i; j < 4; ++j) entries.push_back(m(i, j));
    nlohmann::json j{{"ordering", late_first ? kOrderingLateFirst : kOrderingEarlyFirst},
                     {"normalization", kNormalizationVacuumIdentity},
                     {"entries", entries}};
    return j.dump(2);
}

CovarianceMatrix4 covariance_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ContractViolation(std::string("covariance JSON: ") + e.what());
    }
    const std::string ordering = j.value("ordering", "");
    if (ordering != kOrderingEarlyFirst && ordering != kOrderingLateFirst)
        throw ContractViolation("covariance JSON: unknown ordering '" + ordering + "'");
    if (j.value("normalization", "") != kNormalizationVacuumIdentity)
        throw ContractViolation("covariance JSON: unsupported normalization");
    const auto& entries = j.at("entries");
    if (!entries.is_array() || entries.size() != 10)
        throw ContractViolation("covariance JSON: expected 10 entries");
    Matrix4 m;
    std::size_t k = 0;
    for (int i = 0; i < 4; ++i)
        for (int jj = i; jj < 4; ++jj) {
            m(i, jj) = entries[k++].get<double>();
            m(jj, i) = m(i, jj);
        }
    if (ordering == kOrderingLateFirst) m = swap_mode_order(m);
    return CovarianceMatrix4(m);
}

} // namespace optoent
