#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

namespace optoent::quad {

struct Options {
    double abs_tol = 1e-10;
    double rel_tol = 1e-12;
    int max_subdivisions = 6000;
};

template <class T>
struct Result {
    T value{};
    double error = 0.0;
    int evaluations = 0;
    bool converged = false;
};

inline double norm_inf(double x) { return std::abs(x); }
inline double norm_inf(const std::complex<double>& x) { return std::abs(x); }
template <class Derived>
double norm_inf(const Eigen::DenseBase<Derived>& x) {
    return x.derived().cwiseAbs().maxCoeff();
}

template <class T>
T zero_like(const T& sample) {
    if constexpr (std::is_arithmetic_v<T>) {
        return T(0);
    } else if constexpr (std::is_same_v<T, std::complex<double>>) {
        return T(0.0, 0.0);
    } else {
        T z = sample;
        z.setZero();
        return z;
    }
}

namespace detail {

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
extern const double kKronrodNodes[11];
extern const double kKronrodWeights[11];
extern const double kGaussWeights[5];

enum class Map { finite, left_tail, right_tail, offset };

// A panel in the mapping variable u over [lo, hi].
struct Panel {
    Map map;
    double anchor;  // finite: unused; tails: the finite end; offset: the window centre
    double scale;   // tails: length scale of the substitution
    double lo, hi;
};

// Integrands may take (anchor, offset) to receive the abscissa as an exact
// split; plain integrands get the sum.
template <class F>
auto call(const F& f, double anchor, double offset) {
    if constexpr (std::is_invocable_v<const F&, double, double>)
        return f(anchor, offset);
    else
        return f(anchor + offset);
}

template <class T, class F>
T mapped_eval(const F& f, const Panel& p, double u) {
    switch (p.map) {
    case Map::finite:
        return T(call(f, u, 0.0));
    case Map::offset:
        return T(call(f, p.anchor, u));
    case Map::right_tail: {
        const double x = p.anchor + p.scale * (1.0 - u) / u;
        return T(T(call(f, x, 0.0)) * (p.scale / (u * u)));
    }
    case Map::left_tail:
    default: {
        const double x = p.anchor - p.scale * (1.0 - u) / u;
        return T(T(call(f, x, 0.0)) * (p.scale / (u * u)));
    }
    }
}

template <class T, class F>
void gk21(const F& f, const Panel& p, T& result, double& error) {
    const double center = 0.5 * (p.lo + p.hi);
    const double half = 0.5 * (p.hi - p.lo);
    T fc = mapped_eval<T>(f, p, center);
    T kronrod = T(fc * kKronrodWeights[10]);
    T gauss = zero_like(fc);
    T fv1[10], fv2[10];
    for (int j = 0; j < 10; ++j) {
        const double dx = half * kKronrodNodes[j];
        fv1[j] = mapped_eval<T>(f, p, center - dx);
        fv2[j] = mapped_eval<T>(f, p, center + dx);
        const T sum = fv1[j] + fv2[j];
        kronrod = T(kronrod + sum * kKronrodWeights[j]);
        if (j % 2 == 1) gauss = T(gauss + sum * kGaussWeights[j / 2]);
    }
    const T mean = T(kronrod * 0.5);
    double resasc = kKronrodWeights[10] * norm_inf(T(fc - mean));
    double resabs = kKronrodWeights[10] * norm_inf(fc);
    for (int j = 0; j < 10; ++j) {
        resasc += kKronrodWeights[j] * (norm_inf(T(fv1[j] - mean)) + norm_inf(T(fv2[j] - mean)));
        resabs += kKronrodWeights[j] * (norm_inf(fv1[j]) + norm_inf(fv2[j]));
    }
    result = T(kronrod * half);
    resasc *= std::abs(half);
    resabs *= std::abs(half);
    double err = norm_inf(T((kronrod - gauss) * half));
    if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) err = std::max(50.0 * eps * resabs, err);
    error = err;
}

template <class T, class F>
Result<T> adaptive(const F& f, std::vector<Panel> panels, const Options& opt) {
    struct Item {
        Panel panel;
        T value;
        double error;
    };
    std::vector<Item> items;
    items.reserve(panels.size() + 2 * static_cast<std::size_t>(opt.max_subdivisions));
    Result<T> out;
    for (const auto& p : panels) {
        Item it{p, {}, 0.0};
        gk21<T>(f, p, it.value, it.error);
        out.evaluations += 21;
        items.push_back(std::move(it));
    }
    auto cmp = [](const Item& a, const Item& b) { return a.error < b.error; };
    std::make_heap(items.begin(), items.end(), cmp);

    auto totals = [&](T& value, double& error) {
        value = zero_like(items.front().value);
        error = 0.0;
        for (const auto& it : items) {
            value = T(value + it.value);
            error += it.error;
        }
    };

    T total{};
    double total_err = 0.0;
    totals(total, total_err);
    int splits = 0;
    while (total_err > std::max(opt.abs_tol, opt.rel_tol * norm_inf(total))) {
        if (splits >= opt.max_subdivisions) break;
        std::pop_heap(items.begin(), items.end(), cmp);
        Item worst = items.back();
        items.pop_back();
        const double mid = 0.5 * (worst.panel.lo + worst.panel.hi);
        if (!(mid > worst.panel.lo && mid < worst.panel.hi)) {
            // Panel cannot be refined further in floating point.
            items.push_back(worst);
            std::push_heap(items.begin(), items.end(), cmp);
            break;
        }
        Item left{worst.panel, {}, 0.0};
        Item right{worst.panel, {}, 0.0};
        left.panel.hi = mid;
        right.panel.lo = mid;
        gk21<T>(f, left.panel, left.value, left.error);
        gk21<T>(f, right.panel, right.value, right.error);
        out.evaluations += 42;
        total = T(total - worst.value + left.value + right.value);
        total_err += left.error + right.error - worst.error;
        items.push_back(std::move(left));
        std::push_heap(items.begin(), items.end(), cmp);
        items.push_back(std::move(right));
        std::push_heap(items.begin(), items.end(), cmp);
        ++splits;
        // Incremental totals drift; resum periodically.
        if (splits % 64 == 0) totals(total, total_err);
    }
    totals(total, total_err);
    out.value = total;
    out.error = total_err;
    out.converged = total_err <= std::max(opt.abs_tol, opt.rel_tol * norm_inf(total));
    return out;
}

std::vector<double> sorted_unique(std::vector<double> points);

} // namespace detail

// Adaptive integral over [a, b].
template <class T, class F>
Result<T> integrate(const F& f, double a, double b, const Options& opt = {}) {
    return detail::adaptive<T>(f, {detail::Panel{detail::Map::finite, 0.0, 0.0, a, b}}, opt);
}

// Integral over [a, b] with forced panel boundaries at the given interior points.
template <class T, class F>
Result<T> integrate(const F& f, double a, double b, std::vector<double> breakpoints, const Options& opt = {}) {
    breakpoints.push_back(a);
    breakpoints.push_back(b);
    auto pts = detail::sorted_unique(std::move(breakpoints));
    std::vector<detail::Panel> panels;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        if (pts[i] < a || pts[i + 1] > b) continue;
        panels.push_back({detail::Map::finite, 0.0, 0.0, pts[i], pts[i + 1]});
    }
    return detail::adaptive<T>(f, std::move(panels), opt);
}

// Integral over [a, +inf) via x = a + s (1-u)/u.
template <class T, class F>
Result<T> integrate_to_infinity(const F& f, double a, double scale, const Options& opt = {}) {
    return detail::adaptive<T>(f, {detail::Panel{detail::Map::right_tail, a, scale, 0.0, 1.0}}, opt);
}

// Integral over the real line. Finite panels join consecutive breakpoints;
// beyond the outermost ones the tails are mapped onto (0, 1].
template <class T, class F>
Result<T> integrate_line(const F& f, std::vector<double> breakpoints, const Options& opt = {}) {
    auto pts = detail::sorted_unique(std::move(breakpoints));
    if (pts.size() < 2) {
        const double c = pts.empty() ? 0.0 : pts.front();
        pts = {c - 1.0, c + 1.0};
    }
    std::vector<detail::Panel> panels;
    const double left_scale = std::max(1.0, std::abs(pts.front()));
    const double right_scale = std::max(1.0, std::abs(pts.back()));
    panels.push_back({detail::Map::left_tail, pts.front(), left_scale, 0.0, 1.0});
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
        panels.push_back({detail::Map::finite, 0.0, 0.0, pts[i], pts[i + 1]});
    panels.push_back({detail::Map::right_tail, pts.back(), right_scale, 0.0, 1.0});
    return detail::adaptive<T>(f, std::move(panels), opt);
}

// Neighbourhood of a sharp feature integrated in the offset from its centre,
// so that abscissae closer to the centre than its ulp stay distinct.
struct Window {
    double centre = 0.0;
    double half_width = 0.0;
    std::vector<double> offsets;  // interior panel boundaries, relative to centre
};

// Like integrate_line, but intervals covered by windows are integrated in the
// offset variable. Windows must not overlap; breakpoints inside them are ignored.
template <class T, class F>
Result<T> integrate_line(const F& f, std::vector<double> breakpoints, const std::vector<Window>& windows,
                         const Options& opt = {}) {
    auto inside = [&](double x) {
        for (const auto& w : windows)
            if (x > w.centre - w.half_width && x < w.centre + w.half_width) return true;
        return false;
    };
    std::vector<double> outer;
    for (double x : breakpoints)
        if (!inside(x)) outer.push_back(x);
    for (const auto& w : windows) {
        outer.push_back(w.centre - w.half_width);
        outer.push_back(w.centre + w.half_width);
    }
    auto pts = detail::sorted_unique(std::move(outer));
    std::vector<detail::Panel> panels;
    panels.push_back({detail::Map::left_tail, pts.front(), std::max(1.0, std::abs(pts.front())), 0.0, 1.0});
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        if (inside(0.5 * (pts[i] + pts[i + 1]))) continue;
        panels.push_back({detail::Map::finite, 0.0, 0.0, pts[i], pts[i + 1]});
    }
    panels.push_back({detail::Map::right_tail, pts.back(), std::max(1.0, std::abs(pts.back())), 0.0, 1.0});
    for (const auto& w : windows) {
        std::vector<double> cuts{-w.half_width, w.half_width};
        for (double s : w.offsets)
            if (std::abs(s) < w.half_width) cuts.push_back(s);
        cuts = detail::sorted_unique(std::move(cuts));
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
            panels.push_back({detail::Map::offset, w.centre, 0.0, cuts[i], cuts[i + 1]});
    }
    return detail::adaptive<T>(f, std::move(panels), opt);
}

} // namespace optoent::quad
