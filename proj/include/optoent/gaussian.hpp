#pragma once

#include <complex>
#include <string>

#include <Eigen/Dense>

#include "optoent/epr.hpp"
#include "optoent/model.hpp"
#include "optoent/pulses.hpp"

namespace optoent {

// Ordering tags for the two supported quadrature orderings.
inline constexpr const char* kOrderingEarlyFirst = "xE,pE,xL,pL";
inline constexpr const char* kOrderingLateFirst = "xL,pL,xE,pE";
inline constexpr const char* kNormalizationVacuumIdentity = "vacuum=identity";

// Covariance of the early/late pair in the ordering (x_E, p_E, x_L, p_L),
// Xi_ij = <O_i O_j + O_j O_i> - 2 <O_i><O_j>, so the vacuum is the identity.
class CovarianceMatrix4 {
public:
    CovarianceMatrix4() : xi_(Matrix4::Identity()) {}
    // Symmetrizes the input; the stored matrix is exactly symmetric.
    explicit CovarianceMatrix4(const Matrix4& xi);

    const Matrix4& xi() const { return xi_; }
    double operator()(int i, int j) const { return xi_(i, j); }

private:
    Matrix4 xi_;
};

// Symplectic form sigma = diag(J, J), J = [[0, 1], [-1, 0]].
Matrix4 symplectic_form();

CovarianceMatrix4 vacuum_covariance();
// Both modes thermal with variance `variance` (vacuum = 1).
CovarianceMatrix4 thermal_covariance(double variance);
// Two-mode squeezed vacuum with correlations x_E ~ x_L, p_E ~ -p_L.
CovarianceMatrix4 two_mode_squeezed(double r);

// Maps (x_E, p_E, x_L, p_L) <-> (x_L, p_L, x_E, p_E). The permutation is an
// involution, so the same call converts in both directions.
Matrix4 swap_mode_order(const Matrix4& xi);

// Momentum sign flip on the late mode.
CovarianceMatrix4 partial_transpose(const CovarianceMatrix4& cov);

// Smallest eigenvalue of the Hermitian matrix Xi + i x sigma.
double physicality_margin(const Matrix4& xi, double x = 1.0);
bool is_physical(const CovarianceMatrix4& cov, double tolerance = 1e-8);
// Throws ContractViolation when cov fails physicality beyond tolerance.
void require_physical(const CovarianceMatrix4& cov, const char* who);

struct CovarianceResult {
    CovarianceMatrix4 cov;
    double error = 0.0;  // largest quadrature error estimate among the entries
};

// Assembles all ten second moments from frequency integrals of the output
// spectrum contracted with the mode functions; valid for any detuning. The
// late mode is unrotated (pulse.phi is not applied); params.eta mixes in vacuum.
CovarianceResult covariance_from_spectra(const SystemParams& params, const PulseParams& pulse);

// Duan functional with the late mode rotated by phi:
// value(phi) = at_zero + 2 Re((e^{i phi} - 1) cross).
struct DuanComponents {
    double at_zero = 0.0;
    std::complex<double> cross{};
};
DuanComponents duan_components(const CovarianceMatrix4& cov);
double duan_value(const CovarianceMatrix4& cov, double phi);
PhiOptimum optimize_phi(const CovarianceMatrix4& cov);

enum class PptVerdict { separable_consistent, entangled };
const char* verdict_name(PptVerdict verdict);

// Throws ContractViolation on unphysical input.
PptVerdict ppt_check(const CovarianceMatrix4& cov);

struct SymplecticSpectrum {
    double nu_minus = 0.0;
    double nu_plus = 0.0;
};

// Symplectic eigenvalues of Xi (or of its partial transpose), ascending.
SymplecticSpectrum symplectic_spectrum(const CovarianceMatrix4& cov, bool transposed);

// max(0, -ln nu_minus) of the partially transposed spectrum.
double log_negativity(const CovarianceMatrix4& cov);

struct WitnessResult {
    double value = 0.0;  // tr(X Xi); every separable state gives >= 2
    Matrix4 x_matrix = Matrix4::Zero();
    std::string family;
    bool converged = true;
};

// Minimizes the Duan functional over local symplectic transformations
// (rotation and squeezing on each mode) and the balance between the modes.
WitnessResult optimal_witness(const CovarianceMatrix4& cov);

struct WitnessScan {
    double gamma = 0.0;
    CovarianceMatrix4 cov;
    WitnessResult witness;
};

// Pulse bandwidth minimizing the optimal-witness value, searched like
// minimize_over_gamma (log scale, seeded at gamma_opt).
WitnessScan minimize_witness_over_gamma(const SystemParams& params, double t_sep, const GammaSearch& search = {});

struct ShotNoiseReport {
    bool physical_at_x = false;
    bool ppt_at_x = false;
};

// Tests Xi + i x sigma >= 0 and Xi^T_L + i x sigma >= 0 for a mis-calibrated
// shot-noise unit x. Runs on unphysical input by design.
ShotNoiseReport shot_noise_sensitivity(const CovarianceMatrix4& cov, double x_scale);

// 2 minus the number of symplectic eigenvalues within 1e-6 (relative) of 1.
int symplectic_rank(const CovarianceMatrix4& cov);

// JSON interchange: {"ordering", "normalization", "entries": {"xx_EE": ...}}
// with the ten upper-triangular entries.
std::string covariance_to_json(const CovarianceMatrix4& cov, bool late_first = false);
CovarianceMatrix4 covariance_from_json(const std::string& text);

} // namespace optoent
