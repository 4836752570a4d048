#include "optoent/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <thread>

#include <json.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include "optoent/error.hpp"

namespace optoent {

namespace {

using cplx = std::complex<double>;
using Mat8 = Eigen::Matrix<double, 8, 8>;
using Vec8 = Eigen::Matrix<double, 8, 1>;

constexpr double kTruncation = 10.0;  // envelopes cut at kTruncation / Gamma

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Independent stream for trajectory `index` of a run seeded with `seed`.
std::mt19937_64 stream(std::uint64_t seed, std::uint64_t index) {
    return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(index + 0x5851F42D4C957F2DULL)));
}

double max_step(const SystemParams& p) { return 0.05 * std::min(1.0 / p.kappa, 1.0 / p.omega_m); }

// Square root of a positive semidefinite matrix, tolerant of exact zeros.
template <class M>
M psd_sqrt(const M& q) {
    Eigen::SelfAdjointEigenSolver<M> es(0.5 * (q + q.transpose()));
    const auto vals = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * vals.asDiagonal();
}

// One-step map for the state augmented with the bin integrals of the cavity
// quadratures and of the two input noises. Starting from (x, 0, 0) the step
// yields (x', int x_c dt, int dW_in), so the output bin integral is
// sqrt(kappa) int x_c dt - Delta W_in.
struct Stepper {
    Eigen::Matrix<double, 8, 4> transition;
    Mat8 noise;  // z = transition x + noise xi, xi ~ N(0, I)
};

Stepper exact_stepper(const SystemParams& p, double dt) {
    Mat8 a = Mat8::Zero();
    a.topLeftCorner<4, 4>() = drift_matrix(p);
    a(4, 2) = 1.0;
    a(5, 3) = 1.0;
    Eigen::Matrix<double, 8, 4> b = Eigen::Matrix<double, 8, 4>::Zero();
    b.topRows<4>() = noise_input_matrix(p);
    b(6, 0) = 1.0;
    b(7, 1) = 1.0;
    const Mat8 g = b * noise_intensities(p).asDiagonal() * b.transpose();

    // Van Loan: exp([[-A, G], [0, A^T]] dt) = [[., F^-1 Q], [0, F^T]].
    Eigen::Matrix<double, 16, 16> m = Eigen::Matrix<double, 16, 16>::Zero();
    m.topLeftCorner<8, 8>() = -a * dt;
    m.topRightCorner<8, 8>() = g * dt;
    m.bottomRightCorner<8, 8>() = a.transpose() * dt;
    const Eigen::Matrix<double, 16, 16> e = m.exp();
    const Mat8 phi = e.bottomRightCorner<8, 8>().transpose();
    const Mat8 q = phi * e.topRightCorner<8, 8>();

    Stepper s;
    s.transition = phi.leftCols<4>();
    s.noise = psd_sqrt(q);
    return s;
}

Stepper euler_stepper(const SystemParams& p, double dt) {
    Stepper s;
    s.transition.setZero();
    s.transition.topRows<4>() = Matrix4::Identity() + drift_matrix(p) * dt;
    s.transition(4, 2) = dt;
    s.transition(5, 3) = dt;
    s.noise.setZero();
    const Eigen::Vector4d n = noise_intensities(p);
    const Matrix4 b = noise_input_matrix(p);
    for (int k = 0; k < 4; ++k) {
        const double sd = std::sqrt(n(k) * dt);
        s.noise.block<4, 1>(0, k) = b.col(k) * sd;
    }
    s.noise(6, 0) = std::sqrt(n(0) * dt);
    s.noise(7, 1) = std::sqrt(n(1) * dt);
    return s;
}

// int_a^b c e^{z t} dt for a < b, with the growth folded into the exponent.
cplx exp_integral(cplx z, double a, double b, double shift) {
    return (std::exp(z * b - shift) - std::exp(z * a - shift)) / z;
}

// Integral of the mode function over [a, b] (mode-local time).
cplx mode_integral(Mode m, double a, double b, const PulseParams& pulse, double omega_m) {
    const double half = 0.5 * pulse.t_sep;
    const double amp = std::sqrt(2.0 * pulse.gamma);
    if (m == Mode::early) {
        const double lo = std::max(a, -half - kTruncation / pulse.gamma), hi = std::min(b, -half);
        if (!(hi > lo)) return 0.0;
        const cplx z(pulse.gamma, -omega_m);
        return amp * exp_integral(z, lo, hi, -pulse.gamma * half);
    }
    const double lo = std::max(a, half), hi = std::min(b, half + kTruncation / pulse.gamma);
    if (!(hi > lo)) return 0.0;
    const cplx z(-pulse.gamma, omega_m);
    return amp * exp_integral(z, lo, hi, pulse.gamma * half);
}

} // namespace

Matrix4 stationary_covariance(const SystemParams& p) {
    require_stable(p);
    const Matrix4 a = drift_matrix(p);
    const Matrix4 b = noise_input_matrix(p);
    const Matrix4 d = b * noise_intensities(p).asDiagonal() * b.transpose();
    // Column-major vec: (I (x) A + A (x) I) vec(S) = -vec(D).
    Eigen::Matrix<double, 16, 16> k = Eigen::Matrix<double, 16, 16>::Zero();
    for (int col = 0; col < 4; ++col)
        for (int row = 0; row < 4; ++row) {
            const int r = 4 * col + row;
            for (int m = 0; m < 4; ++m) {
                k(r, 4 * col + m) += a(row, m);  // (A S)_{row,col}
                k(r, 4 * m + row) += a(col, m);  // (S A^T)_{row,col}
            }
        }
    Eigen::Matrix<double, 16, 1> rhs;
    for (int col = 0; col < 4; ++col)
        for (int row = 0; row < 4; ++row) rhs(4 * col + row) = -d(row, col);
    const Eigen::Matrix<double, 16, 1> v = k.fullPivLu().solve(rhs);
    Matrix4 s;
    for (int col = 0; col < 4; ++col)
        for (int row = 0; row < 4; ++row) s(row, col) = v(4 * col + row);
    return 0.5 * (s + s.transpose());
}

OutputRecord simulate_record(const SystemParams& params, double dt, double t_total, std::uint64_t seed,
                             const SimulationOptions& options) {
    validate(params);
    require_stable(params);
    if (!(dt > 0.0)) throw ContractViolation("simulate_record: dt must be > 0");
    if (dt > max_step(params) * (1.0 + 1e-12))
        throw ContractViolation("simulate_record: dt exceeds 0.05 min(1/kappa, 1/omega_m)");
    if (!(t_total > 0.0)) throw ContractViolation("simulate_record: t_total must be > 0");

    const Stepper step = options.integrator == Integrator::exact ? exact_stepper(params, dt) : euler_stepper(params, dt);
    auto rng = stream(seed, 0);
    std::normal_distribution<double> normal;

    Eigen::Vector4d x = Eigen::Vector4d::Zero();
    double burn_in = options.burn_in;
    if (options.initial == InitialState::stationary) {
        const Matrix4 root = psd_sqrt(stationary_covariance(params));
        Eigen::Vector4d xi;
        for (int k = 0; k < 4; ++k) xi(k) = normal(rng);
        x = root * xi;
        if (burn_in < 0.0) burn_in = 0.0;
    } else if (burn_in < 0.0) {
        burn_in = 10.0 / params.gamma_m;
    }

    const auto n_burn = static_cast<long long>(std::ceil(burn_in / dt));
    const auto n_bins = static_cast<std::size_t>(std::ceil(t_total / dt - 1e-9));
    OutputRecord rec;
    rec.t0 = 0.0;
    rec.dt = dt;
    rec.x.resize(n_bins);
    rec.p.resize(n_bins);
    const double sqrt_kappa = std::sqrt(params.kappa);
    Vec8 xi;
    for (long long k = -n_burn; k < static_cast<long long>(n_bins); ++k) {
        for (int j = 0; j < 8; ++j) xi(j) = normal(rng);
        const Vec8 z = step.transition * x + step.noise * xi;
        x = z.head<4>();
        if (k >= 0) {
            rec.x[static_cast<std::size_t>(k)] = (sqrt_kappa * z(4) - z(6)) / dt;
            rec.p[static_cast<std::size_t>(k)] = (sqrt_kappa * z(5) - z(7)) / dt;
        }
    }
    return rec;
}

OutputRecord apply_efficiency(const OutputRecord& record, double eta, std::uint64_t seed) {
    if (!(eta > 0.0 && eta <= 1.0)) throw ContractViolation("apply_efficiency: eta must lie in (0, 1]");
    if (eta == 1.0) return record;
    auto rng = stream(seed, 0x10000000ULL);
    std::normal_distribution<double> normal;
    const double keep = std::sqrt(eta);
    const double vac = std::sqrt((1.0 - eta) * 0.5 / record.dt);
    OutputRecord out = record;
    for (std::size_t k = 0; k < out.size(); ++k) {
        out.x[k] = keep * out.x[k] + vac * normal(rng);
        out.p[k] = keep * out.p[k] + vac * normal(rng);
    }
    return out;
}

double required_record_length(const PulseParams& pulse) {
    validate(pulse);
    return pulse.t_sep + 2.0 * kTruncation / pulse.gamma;
}

std::pair<cplx, cplx> extract_pulses(const OutputRecord& record, const PulseParams& pulse, double omega_m) {
    return extract_pulses(record, pulse, omega_m, 0.5 * (record.t0 + record.t_end()));
}

std::pair<cplx, cplx> extract_pulses(const OutputRecord& record, const PulseParams& pulse, double omega_m,
                                     double t_centre) {
    validate(pulse);
    const double reach = 0.5 * pulse.t_sep + kTruncation / pulse.gamma;
    const double slack = 1e-9 * std::max(1.0, std::abs(t_centre) + reach);
    if (t_centre - reach < record.t0 - slack || t_centre + reach > record.t_end() + slack)
        throw ContractViolation("extract_pulses: record does not cover the truncated mode envelopes");

    // Bin weights are exact integrals of the envelopes over each bin, so
    // partially covered bins at the support edges are handled exactly.
    cplx r_e = 0.0, r_l = 0.0;
    const auto first = static_cast<std::size_t>(std::max(0.0, std::floor((t_centre - reach - record.t0) / record.dt)));
    const auto last = std::min(record.size(), static_cast<std::size_t>(std::ceil((t_centre + reach - record.t0) / record.dt)) + 1);
    for (std::size_t k = first; k < last; ++k) {
        const double a = record.t0 + record.dt * static_cast<double>(k) - t_centre;
        const double b = a + record.dt;
        const cplx sample(record.x[k], record.p[k]);
        r_e += mode_integral(Mode::early, a, b, pulse, omega_m) * sample;
        r_l += mode_integral(Mode::late, a, b, pulse, omega_m) * sample;
    }
    return {r_e, r_l};
}

TrajectoryEnsemble run_ensemble(const SystemParams& params, const PulseParams& pulse, const EnsembleOptions& options) {
    validate(params);
    validate(pulse);
    if (options.n_traj < 2) throw ContractViolation("run_ensemble: n_traj must be >= 2");
    const double dt = options.dt > 0.0 ? options.dt : max_step(params);
    const double t_total = required_record_length(pulse) + 2.0 * dt;

    TrajectoryEnsemble ens;
    ens.n_traj = options.n_traj;
    ens.dt = dt;
    ens.t_total = t_total;
    ens.seed = options.seed;
    ens.eta = params.eta;
    ens.burn_in = options.simulation.burn_in >= 0.0 ? options.simulation.burn_in
                  : options.simulation.initial == InitialState::rest ? 10.0 / params.gamma_m
                                                                     : 0.0;
    ens.samples.resize(static_cast<std::size_t>(options.n_traj));

    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    auto worker = [&] {
        try {
            for (int i = next++; i < options.n_traj && !failed; i = next++) {
                const auto idx = static_cast<std::uint64_t>(i);
                const std::uint64_t traj_seed = splitmix64(options.seed) ^ splitmix64(2 * idx + 1);
                OutputRecord rec = simulate_record(params, dt, t_total, traj_seed, options.simulation);
                if (params.eta < 1.0) rec = apply_efficiency(rec, params.eta, traj_seed);
                ens.samples[static_cast<std::size_t>(i)] = extract_pulses(rec, pulse, params.omega_m);
            }
        } catch (...) {
            if (!failed.exchange(true)) failure = std::current_exception();
        }
    };
    unsigned n_threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(options.n_traj));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    return ens;
}

namespace {

Eigen::Vector4d quadratures(const std::pair<cplx, cplx>& s) {
    return {s.first.real(), s.first.imag(), s.second.real(), s.second.imag()};
}

// Xi = 2 Cov with the unbiased normalization, from raw sums.
Matrix4 covariance_from_sums(const Eigen::Vector4d& sum, const Matrix4& outer, double n) {
    const Eigen::Vector4d mean = sum / n;
    return 2.0 * (outer - n * mean * mean.transpose()) / (n - 1.0);
}

template <class F>
void for_each_leave_one_out(const TrajectoryEnsemble& ens, const F& visit) {
    Eigen::Vector4d sum = Eigen::Vector4d::Zero();
    Matrix4 outer = Matrix4::Zero();
    for (const auto& s : ens.samples) {
        const Eigen::Vector4d v = quadratures(s);
        sum += v;
        outer += v * v.transpose();
    }
    const double n = static_cast<double>(ens.samples.size());
    for (const auto& s : ens.samples) {
        const Eigen::Vector4d v = quadratures(s);
        visit(covariance_from_sums(sum - v, outer - v * v.transpose(), n - 1.0));
    }
}

void require_samples(const TrajectoryEnsemble& ens) {
    if (ens.samples.size() < 100)
        throw ContractViolation("estimate_covariance: at least 100 trajectories are required for error estimates");
}

} // namespace

CovarianceEstimate estimate_covariance(const TrajectoryEnsemble& ens) {
    require_samples(ens);
    const double n = static_cast<double>(ens.samples.size());
    Eigen::Vector4d sum = Eigen::Vector4d::Zero();
    Matrix4 outer = Matrix4::Zero();
    for (const auto& s : ens.samples) {
        const Eigen::Vector4d v = quadratures(s);
        sum += v;
        outer += v * v.transpose();
    }
    CovarianceEstimate est;
    est.n = static_cast<int>(ens.samples.size());
    est.cov = CovarianceMatrix4(covariance_from_sums(sum, outer, n));

    Matrix4 jk_sum = Matrix4::Zero(), jk_sq = Matrix4::Zero();
    for_each_leave_one_out(ens, [&](const Matrix4& xi) {
        jk_sum += xi;
        jk_sq += xi.cwiseProduct(xi);
    });
    const Matrix4 jk_mean = jk_sum / n;
    const Matrix4 var = (jk_sq / n - jk_mean.cwiseProduct(jk_mean)).cwiseMax(0.0);
    est.standard_error = ((n - 1.0) * var).cwiseSqrt();
    return est;
}

ScalarEstimate estimate_duan(const TrajectoryEnsemble& ens, double phi) {
    require_samples(ens);
    const double n = static_cast<double>(ens.samples.size());
    ScalarEstimate est;
    est.value = duan_value(estimate_covariance(ens).cov, phi);
    double s = 0.0, s2 = 0.0;
    for_each_leave_one_out(ens, [&](const Matrix4& xi) {
        const double v = duan_value(CovarianceMatrix4(xi), phi);
        s += v;
        s2 += v * v;
    });
    const double mean = s / n;
    est.standard_error = std::sqrt(std::max(0.0, (n - 1.0) * (s2 / n - mean * mean)));
    return est;
}

void write_record_csv(const OutputRecord& record, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << std::setprecision(17) << "t,x_out,p_out\n";
    for (std::size_t k = 0; k < record.size(); ++k)
        out << record.t0 + record.dt * (static_cast<double>(k) + 0.5) << ',' << record.x[k] << ',' << record.p[k] << '\n';
    if (!out) throw IoError("write failed for '" + path + "'");
}

std::string ensemble_to_json(const TrajectoryEnsemble& ens) {
    nlohmann::json samples = nlohmann::json::array();
    for (const auto& s : ens.samples)
        samples.push_back({s.first.real(), s.first.imag(), s.second.real(), s.second.imag()});
    nlohmann::json j{{"schema", "optoent.ensemble/1"},
                     {"n_traj", ens.n_traj},
                     {"dt", ens.dt},
                     {"t_total", ens.t_total},
                     {"seed", ens.seed},
                     {"burn_in", ens.burn_in},
                     {"eta", ens.eta},
                     {"columns", {"re_r_E", "im_r_E", "re_r_L", "im_r_L"}},
                     {"samples", samples}};
    return j.dump();
}

TrajectoryEnsemble ensemble_from_json(const std::string& text) {
    TrajectoryEnsemble ens;
    try {
        const auto j = nlohmann::json::parse(text);
        if (j.value("schema", "") != "optoent.ensemble/1") throw ContractViolation("ensemble JSON: unknown schema");
        ens.n_traj = j.at("n_traj").get<int>();
        ens.dt = j.at("dt").get<double>();
        ens.t_total = j.at("t_total").get<double>();
        ens.seed = j.at("seed").get<std::uint64_t>();
        ens.burn_in = j.at("burn_in").get<double>();
        ens.eta = j.at("eta").get<double>();
        for (const auto& s : j.at("samples"))
            ens.samples.emplace_back(cplx(s.at(0).get<double>(), s.at(1).get<double>()),
                                     cplx(s.at(2).get<double>(), s.at(3).get<double>()));
    } catch (const nlohmann::json::exception& e) {
        throw ContractViolation(std::string("ensemble JSON: ") + e.what());
    }
    if (static_cast<int>(ens.samples.size()) != ens.n_traj)
        throw ContractViolation("ensemble JSON: sample count does not match n_traj");
    return ens;
}

} // namespace optoent
