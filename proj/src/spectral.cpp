#include "optoent/spectral.hpp"

#include <cmath>

#include "optoent/error.hpp"

namespace optoent {

namespace {
constexpr cplx kI{0.0, 1.0};
}

cplx chi_m(double omega, const SystemParams& p) { return chi_m(Freq::at(omega, p.omega_m), p); }

cplx chi_m(const Freq& f, const SystemParams& p) {
    // (omega_m - w)(omega_m + w) keeps precision near the resonance.
    const double re = -f.minus_wm * f.plus_wm;
    return p.omega_m / cplx(re, -f.omega * p.gamma_m);
}

cplx chi_opt(double omega, const SystemParams& p) {
    return std::sqrt(p.kappa) / cplx(0.5 * p.kappa, -omega);
}

cplx refl_phase(double omega, const SystemParams& p) {
    return cplx(0.5 * p.kappa, omega) / cplx(0.5 * p.kappa, -omega);
}

NoiseFactors noise_factors_exact(double omega, const SystemParams& p) {
    return noise_factors_exact(Freq::at(omega, p.omega_m), p);
}

NoiseFactors noise_factors_exact(const Freq& w, const SystemParams& p) {
    if (p.delta != 0.0) throw ContractViolation("noise_factors_exact requires delta == 0");
    const cplx co = chi_opt(w.omega, p);
    const cplx cm = chi_m(w, p);
    NoiseFactors f;
    f.s = refl_phase(w.omega, p);
    f.b = 2.0 * p.g * p.g * co * co * cm;
    f.t = 2.0 * p.g * std::sqrt(p.gamma_m * (p.n_th + 0.5)) * co * cm;
    return f;
}

NoiseFactors noise_factors_adiabatic(double omega, const SystemParams& p) {
    const auto rates = derive_rates(p);
    const cplx cm = chi_m(omega, p);
    NoiseFactors f;
    f.s = 1.0;
    f.b = 2.0 * rates.gamma_ro * cm;
    f.t = 2.0 * std::sqrt(rates.gamma_ro * rates.gamma_th) * cm;
    return f;
}

double auto_noise_density(double omega, const SystemParams& p) {
    return auto_noise_density(Freq::at(omega, p.omega_m), p);
}

double auto_noise_density(const Freq& w, const SystemParams& p) {
    const double co2 = std::norm(chi_opt(w.omega, p));
    const double cm2 = std::norm(chi_m(w, p));
    const double g2 = p.g * p.g;
    return 4.0 * g2 * co2 * cm2 * (g2 * co2 + p.gamma_m * (p.n_th + 0.5));
}

cplx shot_backaction_density(double omega, const SystemParams& p) {
    return shot_backaction_density(Freq::at(omega, p.omega_m), p);
}

cplx shot_backaction_density(const Freq& w, const SystemParams& p) {
    const cplx co = chi_opt(w.omega, p);
    return 2.0 * p.g * p.g * refl_phase(-w.omega, p) * co * co * chi_m(w, p);
}

TransferFunction::TransferFunction(const SystemParams& params) : params_(params) {
    require_stable(params_);
    input_ = noise_input_matrix(params_).cast<cplx>();
}

TransferMatrix TransferFunction::operator()(double omega) const {
    return (*this)(Freq::at(omega, params_.omega_m));
}

TransferMatrix TransferFunction::operator()(const Freq& f) const {
    // Block cofactor solve of (-i omega I - A) s = B n. The mechanical
    // determinant is formed from (omega_m - w)(omega_m + w) so that it keeps
    // full relative precision within a linewidth of the resonance.
    using Mat2 = Eigen::Matrix<cplx, 2, 2>;
    const SystemParams& p = params_;
    const double omega = f.omega;
    const cplx iw(0.0, omega);
    const bool symmetric = p.brownian == BrownianModel::symmetric;

    // Cavity block C = -i w I - A_cc.
    const cplx cav_diag = 0.5 * p.kappa - iw;
    const cplx cav_det = cav_diag * cav_diag + p.delta * p.delta;
    Mat2 cav_inv;
    cav_inv << cav_diag, -p.delta, p.delta, cav_diag;
    cav_inv /= cav_det;

    // Mechanical block M = -i w I - A_mm.
    Mat2 mech;
    cplx mech_det;
    const double detuning_sq = -f.minus_wm * f.plus_wm;
    if (symmetric) {
        const cplx d = 0.5 * p.gamma_m - iw;
        mech << d, -p.omega_m, p.omega_m, d;
        mech_det = cplx(detuning_sq + 0.25 * p.gamma_m * p.gamma_m, -omega * p.gamma_m);
    } else {
        mech << -iw, -p.omega_m, p.omega_m, p.gamma_m - iw;
        mech_det = cplx(detuning_sq, -omega * p.gamma_m);
    }

    // Coupling blocks: p_m <- x_c and p_c <- x_m, both with +2g in (-A).
    const double two_g = 2.0 * p.g;
    // Schur complement S = M - K_mc C^-1 K_cm only alters entry (1,0).
    Mat2 schur = mech;
    schur(1, 0) -= two_g * two_g * cav_inv(0, 1);
    const cplx schur_det = mech_det + two_g * two_g * cav_inv(0, 1) * mech(0, 1);
    Mat2 schur_inv;
    schur_inv << schur(1, 1), -schur(0, 1), -schur(1, 0), schur(0, 0);
    schur_inv /= schur_det;

    const Eigen::Matrix<cplx, 2, 4> b_mech = input_.topRows<2>();
    const Eigen::Matrix<cplx, 2, 4> b_cav = input_.bottomRows<2>();
    const Eigen::Matrix<cplx, 2, 4> cav_drive = cav_inv * b_cav;

    // rhs_m = B_m n - K_mc C^-1 B_c n, K_mc has 2g at (1,0).
    Eigen::Matrix<cplx, 2, 4> rhs_m = b_mech;
    rhs_m.row(1) -= two_g * cav_drive.row(0);
    const Eigen::Matrix<cplx, 2, 4> s_mech = schur_inv * rhs_m;

    // s_c = C^-1 (B_c n - K_cm s_m), K_cm has 2g at (1,0).
    Eigen::Matrix<cplx, 2, 4> rhs_c = b_cav;
    rhs_c.row(1) -= two_g * s_mech.row(0);
    const Eigen::Matrix<cplx, 2, 4> s_cav = cav_inv * rhs_c;

    TransferMatrix t;
    t.m = std::sqrt(p.kappa) * s_cav;
    t.m(0, 0) -= 1.0;
    t.m(1, 1) -= 1.0;
    return t;
}

TransferMatrix transfer_detuned(double omega, const SystemParams& params) {
    return TransferFunction(params)(omega);
}

TransferMatrix transfer_resonant_closed_form(double omega, const SystemParams& p) {
    const cplx s = refl_phase(omega, p);
    const cplx co = chi_opt(omega, p);
    const cplx cm = chi_m(omega, p);
    TransferMatrix t;
    t.m.setZero();
    t.m(0, 0) = s;
    t.m(1, 0) = 4.0 * p.g * p.g * co * co * cm;
    t.m(1, 1) = s;
    t.m(1, 2) = -2.0 * p.g * std::sqrt(2.0 * p.gamma_m) * co * cm;
    return t;
}

} // namespace optoent
