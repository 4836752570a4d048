#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "optoent/error.hpp"

namespace optoent::detail {

struct LineMinimum {
    double x = 0.0;
    double value = 0.0;
};

// Minimizes f over [lo, hi]: a three-point bracket with spacing ln 3 seeded at
// `seed`, walked downhill with growing steps, then golden-section refinement.
// Throws NonConvergence when the minimum sits on the boundary of [lo, hi].
template <class F>
LineMinimum bracket_and_golden(const F& f, double lo, double hi, double seed, int iterations, const char* who) {
    double step = std::log(3.0);
    if (!(hi - lo > 2.0 * step)) throw ContractViolation(std::string(who) + ": search range too narrow");
    double b = std::clamp(seed, lo + step, hi - step);
    double a = b - step, c = b + step;
    double fa = f(a), fb = f(b), fc = f(c);
    for (int guard = 0; !(fb <= fa && fb <= fc); ++guard) {
        if (guard > 60) throw NonConvergence(std::string(who) + ": bracket search did not terminate");
        if (fa < fc) {
            if (a <= lo) throw NonConvergence(std::string(who) + ": no bracketing triple, minimum below the search range");
            c = b, fc = fb;
            b = a, fb = fa;
            step *= 1.6;
            a = std::max(lo, b - step);
            fa = f(a);
        } else {
            if (c >= hi) throw NonConvergence(std::string(who) + ": no bracketing triple, minimum above the search range");
            a = b, fa = fb;
            b = c, fb = fc;
            step *= 1.6;
            c = std::min(hi, b + step);
            fc = f(c);
        }
    }

    const double ratio = 0.5 * (3.0 - std::sqrt(5.0));
    double x1 = a + ratio * (c - a), x2 = c - ratio * (c - a);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < iterations && c - a > 1e-10; ++it) {
        if (f1 <= f2) {
            c = x2;
            x2 = x1, f2 = f1;
            x1 = a + ratio * (c - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2, f1 = f2;
            x2 = c - ratio * (c - a);
            f2 = f(x2);
        }
    }
    LineMinimum m{f1 <= f2 ? x1 : x2, std::min(f1, f2)};
    if (fb < m.value) m = {b, fb};
    return m;
}

} // namespace optoent::detail
