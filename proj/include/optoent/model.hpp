#pragma once

#include <array>
#include <string>

#include <Eigen/Dense>

namespace optoent {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// How the mechanical bath enters the Langevin equations.
enum class BrownianModel {
    momentum_only,  // xi drives p_m only
    symmetric       // independent xi_x, xi_p drive x_m and p_m, damping split evenly
};

// Physical parameters of the linearized optomechanical system.
// All rates are angular (rad/s).
struct SystemParams {
    double omega_m = 0.0;  // mechanical frequency
    double kappa = 0.0;    // cavity power decay rate
    double gamma_m = 0.0;  // mechanical damping rate
    double g = 0.0;        // linearized coupling
    double delta = 0.0;    // drive detuning from cavity resonance
    double n_th = 0.0;     // thermal phonon occupation
    double eta = 1.0;      // detection efficiency
    BrownianModel brownian = BrownianModel::momentum_only;
};

// Throws ContractViolation when an invariant of SystemParams fails.
void validate(const SystemParams& params);

// Builds params from lab-style inputs. omega_m_hz is the ordinary frequency.
SystemParams params_from_lab_units(double omega_m_hz, double kappa_over_omega_m, double q_factor,
                                   double n_th, double g_hz, double delta_over_kappa, double eta);

// Coupling g that realizes a given quantum cooperativity for otherwise fixed params.
double coupling_for_cooperativity(const SystemParams& params, double c_q);

// The baseline used throughout the figure presets: 1 MHz, kappa = 10 omega_m,
// Q = 1e8, n_th = 1e4, resonant drive, unit efficiency, zero coupling.
SystemParams baseline_params();

struct DerivedRates {
    double gamma_ro = 0.0;  // 4 g^2 / kappa
    double gamma_th = 0.0;  // gamma_m (n_th + 1/2)
    double c_q = 0.0;       // 4 g^2 / (kappa gamma_m (n_th + 1))
    double c_cl = 0.0;      // 4 g^2 / (kappa gamma_m)
    double q_factor = 0.0;  // omega_m / gamma_m
};

DerivedRates derive_rates(const SystemParams& params);

using Matrix4 = Eigen::Matrix4d;

// Drift matrix A of d/dt (x_m, p_m, x_c, p_c) = A (x_m, p_m, x_c, p_c) + noise.
Matrix4 drift_matrix(const SystemParams& params);

// Noise input matrix: columns are (x_in, p_in, xi, xi_x). The xi_x column is
// only populated by the symmetric Brownian model.
Eigen::Matrix<double, 4, 4> noise_input_matrix(const SystemParams& params);

// Symmetrized white-noise intensities of (x_in, p_in, xi, xi_x).
Eigen::Vector4d noise_intensities(const SystemParams& params);

struct StabilityReport {
    std::array<double, 4> drift_eigen_real_parts{};
    bool stable = false;
    double margin = 0.0;                // smallest |Re lambda|
    bool routh_hurwitz_stable = false;  // independent verdict from the characteristic polynomial
    std::string diagnostic;             // non-empty when the two verdicts disagree
};

StabilityReport check_stability(const SystemParams& params);

// Characteristic polynomial s^4 + c[0] s^3 + c[1] s^2 + c[2] s + c[3] of a 4x4 matrix.
std::array<double, 4> characteristic_polynomial(const Matrix4& a);

// Routh-Hurwitz test for the monic quartic with the given coefficients.
bool routh_hurwitz_stable(const std::array<double, 4>& coeffs);

// Throws UnstableSystem if check_stability reports an unstable drift.
void require_stable(const SystemParams& params);

} // namespace optoent
