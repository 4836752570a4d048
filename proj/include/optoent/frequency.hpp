#pragma once

namespace optoent {

// A frequency together with its distances to the two mechanical sidebands.
// Near +-omega_m the mechanical linewidth can be eight orders of magnitude
// below omega_m, so omega - omega_m must not be formed by subtraction.
struct Freq {
    double omega = 0.0;
    double minus_wm = 0.0;  // omega - omega_m
    double plus_wm = 0.0;   // omega + omega_m

    // Plain frequency; the sideband distances are formed by subtraction.
    static Freq at(double omega, double omega_m) { return {omega, omega - omega_m, omega + omega_m}; }

    // omega = omega_m (anchor + offset) with the anchor an integer (-1, 0 or 1);
    // the sideband distances are exact up to one rounding.
    static Freq rescaled(double anchor, double offset, double omega_m) {
        return {omega_m * (anchor + offset), omega_m * ((anchor - 1.0) + offset), omega_m * ((anchor + 1.0) + offset)};
    }

    Freq operator-() const { return {-omega, -plus_wm, -minus_wm}; }
};

} // namespace optoent
