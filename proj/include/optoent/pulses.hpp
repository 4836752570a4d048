#pragma once

#include <complex>

#include "optoent/frequency.hpp"
#include "optoent/model.hpp"

namespace optoent {

// Exponential envelopes demodulated at the mechanical frequency. The early
// mode is anti-causal about -t_sep/2, the late mode causal about +t_sep/2.
struct PulseParams {
    double gamma = 0.0;  // envelope decay rate (rad/s)
    double t_sep = 0.0;  // separation between the two supports (s)
    double phi = 0.0;    // rotation of the late mode (rad)
};

enum class Mode { early, late };

void validate(const PulseParams& pulse);

// f_E(t) = N e^{(Gamma - i omega_m) t} theta(-t - T/2),
// f_L(t) = N e^{(-Gamma + i omega_m) t} theta(t - T/2), N = sqrt(2 Gamma e^{Gamma T}).
// theta(0) = 1.
std::complex<double> mode_time(Mode which, double t, const SystemParams& params, const PulseParams& pulse);

// Fourier transform of mode_time with the library convention (e^{+i omega t}):
// f_E(w) = -i sqrt(Gamma/pi) e^{i omega_m T/2} e^{-i w T/2} / (w - omega_m - i Gamma),
// f_L(w) = +i sqrt(Gamma/pi) e^{i omega_m T/2} e^{+i w T/2} / (w + omega_m + i Gamma).
// The operator r_i = int dw f_i(-w) a_out(w) therefore samples the early mode
// at the red sideband (-omega_m) and the late mode at the blue one.
std::complex<double> mode_freq(Mode which, double omega, const SystemParams& params, const PulseParams& pulse);
std::complex<double> mode_freq(Mode which, const Freq& omega, const PulseParams& pulse);

// Support of a mode in time: [begin, end], one side infinite.
struct Support {
    double begin;
    double end;
};
Support mode_support(Mode which, const PulseParams& pulse);

// int dt f_i(t) conj(f_j(t)), by quadrature over the common support.
std::complex<double> overlap(Mode i, Mode j, const SystemParams& params, const PulseParams& pulse);

// Same overlap evaluated in the frequency domain (Plancherel).
std::complex<double> overlap_freq(Mode i, Mode j, const SystemParams& params, const PulseParams& pulse);

} // namespace optoent
