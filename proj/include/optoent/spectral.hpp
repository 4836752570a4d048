#pragma once

#include <complex>

#include <Eigen/Dense>

#include "optoent/frequency.hpp"
#include "optoent/model.hpp"

namespace optoent {

using cplx = std::complex<double>;

// Frequency-domain response of the linearized model. Fourier convention:
// h(omega) = int dt/sqrt(2 pi) e^{+i omega t} h(t); adjoints are taken after
// the transform. Quadrature vacuum variance is 1/2.

cplx chi_m(double omega, const SystemParams& params);
cplx chi_m(const Freq& omega, const SystemParams& params);
cplx chi_opt(double omega, const SystemParams& params);
cplx refl_phase(double omega, const SystemParams& params);

// Prefactors of shot noise (s), back-action (b) and thermal noise (t).
struct NoiseFactors {
    cplx s;
    cplx b;
    cplx t;
};

// Exact prefactors on resonance. Throws ContractViolation for delta != 0.
NoiseFactors noise_factors_exact(double omega, const SystemParams& params);
NoiseFactors noise_factors_exact(const Freq& omega, const SystemParams& params);

// Prefactors after adiabatic elimination of the cavity (kappa >> omega_m >> gamma_m).
NoiseFactors noise_factors_adiabatic(double omega, const SystemParams& params);

// D(omega) = B(w)B(-w) + T(w)T(-w), real and even.
double auto_noise_density(double omega, const SystemParams& params);
double auto_noise_density(const Freq& omega, const SystemParams& params);
// P(omega) = S(-w) B(w).
cplx shot_backaction_density(double omega, const SystemParams& params);
cplx shot_backaction_density(const Freq& omega, const SystemParams& params);

// Maps Fourier-domain inputs (x_in, p_in, xi, xi_x) to (x_out, p_out).
// The xi_x column is zero unless the symmetric Brownian model is selected.
struct TransferMatrix {
    Eigen::Matrix<cplx, 2, 4> m;
};

// Reusable evaluator: checks stability once, then solves
// (-i omega I - A) s = B n and applies x_out = sqrt(kappa) x_c - x_in.
// Safe to share across threads.
class TransferFunction {
public:
    explicit TransferFunction(const SystemParams& params);
    TransferMatrix operator()(double omega) const;
    TransferMatrix operator()(const Freq& omega) const;
    const SystemParams& params() const { return params_; }

private:
    SystemParams params_;
    Eigen::Matrix<cplx, 4, 4> input_;
};

// One-shot evaluation; throws UnstableSystem for unstable parameters.
TransferMatrix transfer_detuned(double omega, const SystemParams& params);

// The resonant closed form (x_out = S x_in; p_out = S p_in + 4g^2 chi_opt^2 chi_m x_in
// - 2g sqrt(2 gamma_m) chi_opt chi_m xi). Momentum-only Brownian model.
TransferMatrix transfer_resonant_closed_form(double omega, const SystemParams& params);

} // namespace optoent
