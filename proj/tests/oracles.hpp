#pragma once

// Brute-force reference computations kept apart from the library code.

#include <cmath>
#include <functional>
#include <limits>
#include <utility>

namespace oracle {

// (argmin, min) on a uniform grid of n cells.
inline std::pair<double, double> grid_min(const std::function<double(double)>& g, double lo, double hi,
                                          int n = 1000000) {
    double bx = lo, bv = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= n; ++i) {
        const double x = lo + (hi - lo) * i / n;
        const double v = g(x);
        if (v < bv) {
            bv = v;
            bx = x;
        }
    }
    return {bx, bv};
}

inline std::pair<double, double> grid_max(const std::function<double(double)>& g, double lo, double hi,
                                          int n = 1000000) {
    auto r = grid_min([&](double x) { return -g(x); }, lo, hi, n);
    return {r.first, -r.second};
}

// Last grid point x in [lo, hi] (scanning upward) with pred(x) true, i.e. a
// discrete supremum; NaN when none.
inline double grid_sup(const std::function<bool(double)>& pred, double lo, double hi, int n = 1000000) {
    double last = std::numeric_limits<double>::quiet_NaN();
    for (int i = 0; i <= n; ++i) {
        const double x = lo + (hi - lo) * i / n;
        if (pred(x)) last = x;
    }
    return last;
}

inline double grid_inf(const std::function<bool(double)>& pred, double lo, double hi, int n = 1000000) {
    for (int i = 0; i <= n; ++i) {
        const double x = lo + (hi - lo) * i / n;
        if (pred(x)) return x;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace oracle
