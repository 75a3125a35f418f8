#pragma once

// Small numerical kernels shared by the modules: quadrature, bracketed root
// refinement, finite differences, angle wrapping.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "ecsim/error.hpp"

namespace ecsim::numeric {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Wrap an angle into [0, 2*pi).
inline double wrap_angle(double a) {
    double w = std::fmod(a, kTwoPi);
    if (w < 0.0) w += kTwoPi;
    if (w >= kTwoPi) w = 0.0;
    return w;
}

/// Signed distance a - b folded into (-pi, pi].
inline double angle_difference(double a, double b) {
    double d = std::remainder(a - b, kTwoPi);
    if (d <= -std::numbers::pi) d += kTwoPi;
    return d;
}

inline double centered_difference(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

namespace detail {
inline double simpson_step(const std::function<double(double)>& f, double a, double fa, double m,
                           double fm, double b, double fb, double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_step(f, a, fa, lm, flm, m, fm, left, 0.5 * tol, depth - 1) +
           simpson_step(f, m, fm, rm, frm, b, fb, right, 0.5 * tol, depth - 1);
}
}  // namespace detail

/// Adaptive Simpson quadrature of f over [a, b] to absolute tolerance tol.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-13, int max_depth = 40) {
    if (a == b) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::simpson_step(f, a, fa, m, fm, b, fb, whole, tol, max_depth);
}

/// Refine a root of f inside [a, b] where f(a) and f(b) have opposite signs.
/// Bisection interleaved with secant (Illinois) steps; stops at machine
/// resolution of the bracket.
inline double refine_root(const std::function<double(double)>& f, double a, double b, double fa,
                          double fb, int max_iter = 200) {
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa < 0.0) == (fb < 0.0)) throw BracketingError("refine_root: interval does not bracket a root");
    int side = 0;
    for (int it = 0; it < max_iter; ++it) {
        double c = (a * fb - b * fa) / (fb - fa);
        // fall back to bisection when the secant point is not strictly inside
        if (!(c > std::min(a, b) && c < std::max(a, b)) || (it % 3 == 2)) c = 0.5 * (a + b);
        const double fc = f(c);
        if (fc == 0.0) return c;
        if ((fc < 0.0) == (fb < 0.0)) {
            b = c;
            fb = fc;
            if (side == -1) fa *= 0.5;
            side = -1;
        } else {
            a = c;
            fa = fc;
            if (side == +1) fb *= 0.5;
            side = +1;
        }
        if (std::abs(b - a) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(c)))
            break;
    }
    return std::abs(fa) < std::abs(fb) ? a : b;
}

}  // namespace ecsim::numeric
