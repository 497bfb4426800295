#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace allee {

struct QuadratureResult {
    double value;
    bool converged;
};

namespace detail {

template <class Fn>
double simpson_step(Fn& f, double a, double b, double fa, double fm, double fb, double whole,
                    double tol, int depth, bool& converged) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    if (depth <= 0) {
        converged = false;
        return left + right + delta / 15.0;
    }
    return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, converged) +
           simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, converged);
}

}  // namespace detail

/// Adaptive Simpson quadrature with Richardson correction. `converged` is
/// false if any subinterval hit the depth limit before meeting its share of
/// the absolute tolerance.
template <class Fn>
QuadratureResult adaptive_simpson(Fn&& f, double a, double b, double tol = 1e-10,
                                  int max_depth = 40) {
    if (a == b) return {0.0, true};
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    bool converged = true;
    const double v = detail::simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth, converged);
    return {v, converged};
}

/// Trapezoid rule on a tabulated function.
inline double trapezoid(std::span<const double> xs, std::span<const double> ys) {
    double sum = 0.0;
    for (std::size_t i = 1; i < xs.size(); ++i) sum += 0.5 * (ys[i] + ys[i - 1]) * (xs[i] - xs[i - 1]);
    return sum;
}

}  // namespace allee
