#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "ecsim/error.hpp"

namespace ecsim {

/// Clamped cubic spline on a uniform grid. End slopes come from the four-point
/// one-sided difference, which is exact for cubics, so any cubic (and hence any
/// quadratic) is reproduced to rounding.
class CubicSpline {
public:
    CubicSpline() = default;

    CubicSpline(double a, double b, std::vector<double> y) : a_(a), b_(b), y_(std::move(y)) {
        const std::size_t n = y_.size();
        if (n < 4) throw DomainError("CubicSpline: need at least four samples");
        if (!(b > a)) throw DomainError("CubicSpline: empty interval");
        h_ = (b - a) / static_cast<double>(n - 1);
        const double s0 = (-11.0 * y_[0] + 18.0 * y_[1] - 9.0 * y_[2] + 2.0 * y_[3]) / (6.0 * h_);
        const double s1 = (11.0 * y_[n - 1] - 18.0 * y_[n - 2] + 9.0 * y_[n - 3] - 2.0 * y_[n - 4]) / (6.0 * h_);
        solve_moments(s0, s1);
    }

    static CubicSpline sample(const std::function<double(double)>& f, double a, double b, std::size_t n) {
        std::vector<double> y(n);
        const double h = (b - a) / static_cast<double>(n - 1);
        for (std::size_t i = 0; i < n; ++i) y[i] = f(i + 1 == n ? b : a + h * static_cast<double>(i));
        return CubicSpline(a, b, std::move(y));
    }

    double lo() const { return a_; }
    double hi() const { return b_; }
    std::size_t size() const { return y_.size(); }
    double knot(std::size_t i) const { return i + 1 == y_.size() ? b_ : a_ + h_ * static_cast<double>(i); }
    double value_at_knot(std::size_t i) const { return y_[i]; }

    double operator()(double x) const { return eval<0>(x); }
    double derivative(double x) const { return eval<1>(x); }
    double second_derivative(double x) const { return eval<2>(x); }

private:
    void solve_moments(double s0, double s1) {
        // tridiagonal system for the knot second derivatives M_i (Thomas algorithm)
        const std::size_t n = y_.size();
        std::vector<double> diag(n, 4.0), rhs(n), upper(n, 1.0), lower(n, 1.0);
        const double c = 6.0 / (h_ * h_);
        diag[0] = 2.0;
        diag[n - 1] = 2.0;
        rhs[0] = 6.0 / h_ * ((y_[1] - y_[0]) / h_ - s0);
        rhs[n - 1] = 6.0 / h_ * (s1 - (y_[n - 1] - y_[n - 2]) / h_);
        for (std::size_t i = 1; i + 1 < n; ++i) rhs[i] = c * (y_[i + 1] - 2.0 * y_[i] + y_[i - 1]);
        for (std::size_t i = 1; i < n; ++i) {
            const double w = lower[i] / diag[i - 1];
            diag[i] -= w * upper[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        m_.assign(n, 0.0);
        m_[n - 1] = rhs[n - 1] / diag[n - 1];
        for (std::size_t i = n - 1; i-- > 0;) m_[i] = (rhs[i] - upper[i] * m_[i + 1]) / diag[i];
    }

    template <int D>
    double eval(double x) const {
        if (x < a_ - 1e-12 * (b_ - a_) || x > b_ + 1e-12 * (b_ - a_))
            throw DomainError("CubicSpline: evaluation outside the sampled interval");
        const std::size_t n = y_.size();
        auto i = static_cast<std::size_t>(std::clamp((x - a_) / h_, 0.0, static_cast<double>(n - 2)));
        i = std::min(i, n - 2);
        const double xl = a_ + h_ * static_cast<double>(i);
        const double A = (xl + h_ - x) / h_;
        const double B = (x - xl) / h_;
        const double yl = y_[i], yr = y_[i + 1], ml = m_[i], mr = m_[i + 1];
        if constexpr (D == 0) {
            return A * yl + B * yr + ((A * A * A - A) * ml + (B * B * B - B) * mr) * h_ * h_ / 6.0;
        } else if constexpr (D == 1) {
            return (yr - yl) / h_ - (3.0 * A * A - 1.0) / 6.0 * h_ * ml + (3.0 * B * B - 1.0) / 6.0 * h_ * mr;
        } else {
            return A * ml + B * mr;
        }
    }

    double a_ = 0.0, b_ = 1.0, h_ = 1.0;
    std::vector<double> y_, m_;
};

}  // namespace ecsim
