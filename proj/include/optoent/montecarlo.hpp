#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "optoent/gaussian.hpp"
#include "optoent/model.hpp"
#include "optoent/pulses.hpp"

namespace optoent {

// Classical-analog simulation of the linear Langevin equations: all noises are
// Gaussian white noise with the symmetrized intensities (1/2 for each input
// quadrature, n_th + 1/2 for the bath), so second moments of the simulated
// output equal the symmetrized quantum ones.

enum class Integrator {
    exact,           // exact Gaussian transition of the linear SDE over one step
    euler_maruyama,  // first-order scheme, kept for convergence studies
};

enum class InitialState {
    stationary,  // draw from the stationary covariance (no burn-in needed)
    rest,        // start at zero and discard burn_in
};

struct SimulationOptions {
    Integrator integrator = Integrator::exact;
    InitialState initial = InitialState::stationary;
    double burn_in = -1.0;  // < 0: 0 for a stationary start, 10/gamma_m from rest
};

// Output record on bins [t0 + k dt, t0 + (k+1) dt]; x and p hold the bin
// averages of x_out(t) and p_out(t).
struct OutputRecord {
    double t0 = 0.0;
    double dt = 0.0;
    std::vector<double> x;
    std::vector<double> p;

    std::size_t size() const { return x.size(); }
    double t_end() const { return t0 + dt * static_cast<double>(x.size()); }
};

// Stationary covariance of (x_m, p_m, x_c, p_c) for symmetrized noise,
// i.e. the solution of A S + S A^T + B N B^T = 0.
Matrix4 stationary_covariance(const SystemParams& params);

// Simulates one record of duration t_total after the burn-in. Requires a
// stable system and dt <= 0.05 min(1/kappa, 1/omega_m).
OutputRecord simulate_record(const SystemParams& params, double dt, double t_total, std::uint64_t seed,
                             const SimulationOptions& options = {});

// Mixes the record with independent vacuum noise at transmissivity eta.
OutputRecord apply_efficiency(const OutputRecord& record, double eta, std::uint64_t seed);

// r_i = int f_i(t - t_centre) (x_out + i p_out) dt with envelopes truncated
// at 10/Gamma; Re r_i and Im r_i are the mode quadratures (vacuum variance 1/2).
// The mode functions are placed around t_centre (default: record midpoint).
std::pair<std::complex<double>, std::complex<double>> extract_pulses(const OutputRecord& record,
                                                                     const PulseParams& pulse, double omega_m);
std::pair<std::complex<double>, std::complex<double>> extract_pulses(const OutputRecord& record,
                                                                     const PulseParams& pulse, double omega_m,
                                                                     double t_centre);

// Record length needed to cover both truncated envelopes.
double required_record_length(const PulseParams& pulse);

struct EnsembleOptions {
    int n_traj = 2000;
    double dt = 0.0;  // 0: 0.05 min(1/kappa, 1/omega_m)
    std::uint64_t seed = 1;
    unsigned threads = 0;  // 0: hardware concurrency
    SimulationOptions simulation{};
};

struct TrajectoryEnsemble {
    std::vector<std::pair<std::complex<double>, std::complex<double>>> samples;  // (r_E, r_L)
    int n_traj = 0;
    double dt = 0.0;
    double t_total = 0.0;
    std::uint64_t seed = 0;
    double burn_in = 0.0;
    double eta = 1.0;
};

// Runs independent trajectories, each with its own counter-derived RNG stream,
// and extracts the pulse pair from each. params.eta is applied by mixing.
TrajectoryEnsemble run_ensemble(const SystemParams& params, const PulseParams& pulse, const EnsembleOptions& options);

struct CovarianceEstimate {
    CovarianceMatrix4 cov;
    Matrix4 standard_error = Matrix4::Zero();  // delete-one jackknife
    int n = 0;
};

// Sample covariance Xi = 2 Cov in the (x_E, p_E, x_L, p_L) basis. Requires n >= 100.
CovarianceEstimate estimate_covariance(const TrajectoryEnsemble& ensemble);

struct ScalarEstimate {
    double value = 0.0;
    double standard_error = 0.0;
};

// Duan value at phi with its jackknife standard error.
ScalarEstimate estimate_duan(const TrajectoryEnsemble& ensemble, double phi);

void write_record_csv(const OutputRecord& record, const std::string& path);
std::string ensemble_to_json(const TrajectoryEnsemble& ensemble);
TrajectoryEnsemble ensemble_from_json(const std::string& text);

} // namespace optoent
