#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Eigenvalues>

#include "optoent/frequency.hpp"
#include "optoent/model.hpp"
#include "optoent/quadrature.hpp"

namespace optoent::detail {

// Panel layout for output-spectrum integrals in the rescaled variable
// u = omega / omega_m. The integrands are products of Lorentzians of widths
// gamma (pulse) and gamma_m (mechanics) centred on u = +-1, sitting on a
// cavity background of width kappa. The sidebands are integrated in the offset
// from +-1; integrands receive (anchor, offset) and build a Freq from them.
struct SpectralGrid {
    std::vector<double> breakpoints;
    std::vector<quad::Window> windows;
};

inline SpectralGrid spectral_grid(const SystemParams& p, double gamma) {
    SpectralGrid grid;
    std::vector<double> offsets{0.0};
    for (double w : {gamma / p.omega_m, p.gamma_m / p.omega_m})
        for (double k : {1.0, 3.0, 10.0, 30.0}) {
            if (k * w >= 0.45) continue;
            offsets.push_back(-k * w);
            offsets.push_back(k * w);
        }
    // Off resonance the optical spring and damping move the mechanical poles,
    // so the ladder is repeated around the actual pole.
    double shift = 0.0, width = 0.0;
    if (p.delta != 0.0) {
        const Eigen::EigenSolver<Matrix4> es(drift_matrix(p), false);
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < 4; ++i) {
            const auto z = es.eigenvalues()(i);
            if (z.imag() > 0.0 && std::abs(z.real()) < best) {
                best = std::abs(z.real());
                shift = z.imag() / p.omega_m - 1.0;
                width = best / p.omega_m;
            }
        }
    }
    for (double centre : {-1.0, 1.0}) {
        auto cuts = offsets;
        if (width > 0.0 && std::abs(shift) < 0.45) {
            const double s = centre * shift;
            cuts.push_back(s);
            for (double k : {1.0, 3.0, 10.0, 30.0}) {
                if (k * width >= 0.45) continue;
                cuts.push_back(s - k * width);
                cuts.push_back(s + k * width);
            }
        }
        grid.windows.push_back({centre, 0.5, cuts});
    }

    auto& pts = grid.breakpoints;
    pts.push_back(0.0);
    const double kap = p.kappa / p.omega_m;
    for (double sign : {-1.0, 1.0}) {
        pts.push_back(sign * 0.5 * kap);
        for (double x = 2.0; x <= 10.0 * kap; x *= 2.0) pts.push_back(sign * x);
        pts.push_back(sign * 10.0 * kap);
        if (p.delta != 0.0) pts.push_back(sign * std::abs(p.delta) / p.omega_m);
    }
    return grid;
}

template <class T, class F>
quad::Result<T> integrate_spectrum(const F& f, const SystemParams& p, double gamma, const quad::Options& opt) {
    const SpectralGrid grid = spectral_grid(p, gamma);
    return quad::integrate_line<T>(f, grid.breakpoints, grid.windows, opt);
}

} // namespace optoent::detail
