#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "errors.hpp"

namespace scprop {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};

/// Uniform grid lo, lo+h, ..., hi with n points (n >= 2).
struct UniformAxis {
    double lo = 0.0;
    double hi = 1.0;
    int n = 2;

    UniformAxis() = default;
    UniformAxis(double lo_, double hi_, int n_) : lo(lo_), hi(hi_), n(n_) {
        if (n < 2 || !(hi > lo)) throw InvalidArgument("axis needs n >= 2 and hi > lo");
    }
    static UniformAxis symmetric(double half_width, int n) { return {-half_width, half_width, n}; }

    double step() const { return (hi - lo) / (n - 1); }
    double at(int i) const { return i == n - 1 ? hi : lo + i * step(); }
    std::vector<double> points() const {
        std::vector<double> v(n);
        for (int i = 0; i < n; ++i) v[i] = at(i);
        return v;
    }
    bool operator==(const UniformAxis&) const = default;
};

inline std::vector<double> trapezoid_weights(const UniformAxis& ax) {
    std::vector<double> w(ax.n, ax.step());
    w.front() *= 0.5;
    w.back() *= 0.5;
    return w;
}

/// Square phase-space grid; the same window is used for q and p.
struct GridSpec {
    int n_q = 201;
    int n_p = 201;
    double lo = -3 * pi;
    double hi = 3 * pi;

    UniformAxis q_axis() const { return {lo, hi, n_q}; }
    UniformAxis p_axis() const { return {lo, hi, n_p}; }
    static GridSpec square(int n, double half_width) { return {n, n, -half_width, half_width}; }
};

/// Complex samples over a rectangle, row-major by x_axis: value(i, j) sits at (x_i, y_j).
struct ComplexField2D {
    UniformAxis x_axis;
    UniformAxis y_axis;
    std::vector<cplx> values;

    ComplexField2D() = default;
    ComplexField2D(UniformAxis x, UniformAxis y)
        : x_axis(x), y_axis(y), values(static_cast<size_t>(x.n) * y.n) {}

    cplx& operator()(int i, int j) { return values[static_cast<size_t>(i) * y_axis.n + j]; }
    const cplx& operator()(int i, int j) const { return values[static_cast<size_t>(i) * y_axis.n + j]; }
};

struct WaveFunction {
    UniformAxis grid;
    std::vector<cplx> values;

    double norm_squared() const {
        auto w = trapezoid_weights(grid);
        double s = 0.0;
        for (int i = 0; i < grid.n; ++i) s += w[i] * std::norm(values[i]);
        return s;
    }
    double norm() const { return std::sqrt(norm_squared()); }

    /// Linear interpolation, zero outside the grid.
    cplx interpolate(double x) const {
        double f = (x - grid.lo) / grid.step();
        if (!(f >= 0.0) || f > grid.n - 1) return 0.0;
        int k = static_cast<int>(f);
        if (k >= grid.n - 1) return values.back();
        double s = f - k;
        return values[k] * (1.0 - s) + values[k + 1] * s;
    }
};

struct TimeSeries {
    std::vector<double> t;
    std::vector<cplx> values;
};

inline double relative_l2_distance(const ComplexField2D& a, const ComplexField2D& b) {
    if (!(a.x_axis == b.x_axis) || !(a.y_axis == b.y_axis)) throw GridMismatch("fields on different grids");
    double num = 0.0, den = 0.0;
    for (size_t k = 0; k < a.values.size(); ++k) {
        num += std::norm(a.values[k] - b.values[k]);
        den += std::norm(b.values[k]);
    }
    return std::sqrt(num / den);
}

}  // namespace scprop
