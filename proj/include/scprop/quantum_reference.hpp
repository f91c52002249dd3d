#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "grid.hpp"
#include "kerr_system.hpp"
#include "phase_complex.hpp"

namespace scprop {

inline constexpr double default_tail_tol = 1e-12;

/// Orthonormal Hermite function psi_n(x) via the stable two-term recurrence.
inline double hermite_function(int n, double x) {
    if (n < 0) throw InvalidArgument("negative Fock index");
    double prev = 0.0, cur = std::pow(pi, -0.25) * std::exp(-0.5 * x * x);
    for (int k = 0; k < n; ++k) {
        const double next = std::sqrt(2.0 / (k + 1)) * x * cur - std::sqrt(double(k) / (k + 1)) * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

/// Row i, column n holds psi_n(x_i).
inline Eigen::MatrixXd hermite_table(int n_max, const UniformAxis& ax) {
    Eigen::MatrixXd h(ax.n, n_max + 1);
    for (int i = 0; i < ax.n; ++i) {
        const double x = ax.at(i);
        double prev = 0.0, cur = std::pow(pi, -0.25) * std::exp(-0.5 * x * x);
        h(i, 0) = cur;
        for (int k = 0; k < n_max; ++k) {
            const double next = std::sqrt(2.0 / (k + 1)) * x * cur - std::sqrt(double(k) / (k + 1)) * prev;
            prev = cur;
            cur = next;
            h(i, k + 1) = cur;
        }
    }
    return h;
}

struct FockExpansion {
    std::vector<cplx> coeffs;
    int n_max() const { return static_cast<int>(coeffs.size()) - 1; }
    double norm_squared() const {
        double s = 0.0;
        for (auto c : coeffs) s += std::norm(c);
        return s;
    }
};

/// alpha_F = (q + i p)/sqrt(2), so the state is centred at (q, p).
inline cplx fock_amplitude(PhasePoint center) { return cplx(center.q, center.p) / std::sqrt(2.0); }

inline int default_n_max(PhasePoint center) {
    const double m = std::norm(fock_amplitude(center));
    return static_cast<int>(std::ceil(m + 10.0 * std::sqrt(m))) + 20;
}

inline FockExpansion coherent_state_fock(PhasePoint center, int n_max, double tail_tol = default_tail_tol) {
    if (n_max < 0) throw InvalidArgument("negative truncation");
    const cplx alpha = fock_amplitude(center);
    const double m = std::norm(alpha);
    FockExpansion out;
    out.coeffs.resize(n_max + 1);
    cplx c = std::exp(-0.5 * m);
    out.coeffs[0] = c;
    for (int n = 1; n <= n_max; ++n) {
        c *= alpha / std::sqrt(double(n));
        out.coeffs[n] = c;
    }
    // Poisson tail, summed directly to avoid cancellation in 1 - sum.
    double tail = 0.0, term = std::norm(c);
    for (int n = n_max + 1; n < n_max + 100000; ++n) {
        term *= m / n;
        tail += term;
        if (n > m && (term <= 1e-18 * tail || term == 0.0)) break;
    }
    if (tail > tail_tol) throw TruncationTooSmall("Fock tail " + std::to_string(tail) + " above tolerance");
    return out;
}

inline FockExpansion coherent_state_fock(PhasePoint center) {
    return coherent_state_fock(center, default_n_max(center));
}

/// Kerr eigenphase of |n>: E_n = (2n+1)^2.
inline double kerr_energy(int n) { return double(2 * n + 1) * double(2 * n + 1); }

inline FockExpansion kerr_evolve(const FockExpansion& state, double t) {
    FockExpansion out = state;
    for (int n = 0; n <= state.n_max(); ++n) {
        // (2n+1)^2 t can be large; reduce the integer part modulo 2 pi in extended precision.
        const long double ph = static_cast<long double>(kerr_energy(n)) * t;
        out.coeffs[n] *= std::exp(-I * double(std::fmod(ph, 2.0L * std::numbers::pi_v<long double>)));
    }
    return out;
}

inline cplx fock_overlap(const FockExpansion& bra, const FockExpansion& ket) {
    cplx s = 0.0;
    const int n = std::min(bra.n_max(), ket.n_max());
    for (int k = 0; k <= n; ++k) s += std::conj(bra.coeffs[k]) * ket.coeffs[k];
    return s;
}

/// C(t) = <psi|U(t)|psi> as a Fock sum.
inline cplx quantum_autocorrelation(const FockExpansion& state, double t) {
    return fock_overlap(state, kerr_evolve(state, t));
}

inline WaveFunction wavefunction_from_fock(const FockExpansion& state, const UniformAxis& ax) {
    const Eigen::MatrixXd h = hermite_table(state.n_max(), ax);
    WaveFunction wf{ax, std::vector<cplx>(ax.n)};
    for (int i = 0; i < ax.n; ++i) {
        cplx s = 0.0;
        for (int n = 0; n <= state.n_max(); ++n) s += h(i, n) * state.coeffs[n];
        wf.values[i] = s;
    }
    return wf;
}

/// Closed-form coherent state <x|alpha>, centred at (q, p).
inline WaveFunction coherent_wavefunction(PhasePoint center, const UniformAxis& ax) {
    WaveFunction wf{ax, std::vector<cplx>(ax.n)};
    for (int i = 0; i < ax.n; ++i) {
        const double x = ax.at(i);
        wf.values[i] = std::pow(pi, -0.25) *
                       std::exp(-0.5 * (x - center.q) * (x - center.q) + I * center.p * (x - 0.5 * center.q));
    }
    return wf;
}

/// Spectral Kerr propagator K(x', x; t) = sum_{n <= n_max} psi_n(x') e^{-i t (2n+1)^2} psi_n(x).
inline ComplexField2D exact_propagator(const UniformAxis& xp_axis, const UniformAxis& x_axis, double t, int n_max) {
    const Eigen::MatrixXd hp = hermite_table(n_max, xp_axis);
    const Eigen::MatrixXd hx = hermite_table(n_max, x_axis);
    FockExpansion ones{std::vector<cplx>(n_max + 1, 1.0)};
    const FockExpansion ph = kerr_evolve(ones, t);
    Eigen::MatrixXcd left = hp.cast<cplx>();
    for (int n = 0; n <= n_max; ++n) left.col(n) *= ph.coeffs[n];
    const Eigen::MatrixXcd k = left * hx.transpose().cast<cplx>();
    ComplexField2D out(xp_axis, x_axis);
    for (int i = 0; i < xp_axis.n; ++i)
        for (int j = 0; j < x_axis.n; ++j) out(i, j) = k(i, j);
    return out;
}

/// Largest Fock index whose classical orbit fits in the disc inscribed in a phase-space window.
inline int window_n_max(const GridSpec& g) {
    const double r = std::min(std::abs(g.lo), std::abs(g.hi));
    return std::max(0, static_cast<int>(std::floor((r * r - 1.0) / 2.0)));
}

/// Kerr propagator with the coherent-state projector restricted to a phase-space grid:
/// K = (2 pi)^{-1} sum_grid w <x'|U(t)|alpha><alpha|x>, evaluated in the Fock basis.
inline ComplexField2D coherent_projected_propagator(const UniformAxis& xp_axis, const UniformAxis& x_axis, double t,
                                                    const GridSpec& phase_grid, int n_max) {
    const UniformAxis qa = phase_grid.q_axis(), pa = phase_grid.p_axis();
    const auto wq = trapezoid_weights(qa), wp = trapezoid_weights(pa);
    const int n_pts = qa.n * pa.n, nb = n_max + 1;
    Eigen::MatrixXcd c(nb, n_pts);
    Eigen::VectorXd w(n_pts);
    for (int i = 0; i < qa.n; ++i)
        for (int j = 0; j < pa.n; ++j) {
            const int k = i * pa.n + j;
            const cplx alpha = fock_amplitude({qa.at(i), pa.at(j)});
            cplx cn = std::exp(-0.5 * std::norm(alpha));
            c(0, k) = cn;
            for (int n = 1; n < nb; ++n) c(n, k) = (cn *= alpha / std::sqrt(double(n)));
            w(k) = wq[i] * wp[j] / (2 * pi);
        }
    const Eigen::MatrixXcd gram = c * w.asDiagonal() * c.adjoint();
    FockExpansion ones{std::vector<cplx>(nb, 1.0)};
    const FockExpansion ph = kerr_evolve(ones, t);
    Eigen::MatrixXcd left = hermite_table(n_max, xp_axis).cast<cplx>();
    for (int n = 0; n < nb; ++n) left.col(n) *= ph.coeffs[n];
    const Eigen::MatrixXcd k = left * gram * hermite_table(n_max, x_axis).transpose().cast<cplx>();
    ComplexField2D out(xp_axis, x_axis);
    for (int i = 0; i < xp_axis.n; ++i)
        for (int j = 0; j < x_axis.n; ++j) out(i, j) = k(i, j);
    return out;
}

/// W(q,p) = pi^{-1} int dqt psi(q+qt) psi*(q-qt) e^{-2 i qt p}, trapezoid in qt with the
/// psi grid spacing and zero padding outside the psi grid.
inline ComplexField2D wigner_transform(const WaveFunction& psi, const UniformAxis& grid_q, const UniformAxis& grid_p) {
    const double h = psi.grid.step();
    const int kmax = psi.grid.n;
    ComplexField2D out(grid_q, grid_p);
    std::vector<cplx> f(2 * kmax + 1);
    for (int i = 0; i < grid_q.n; ++i) {
        const double q = grid_q.at(i);
        for (int k = -kmax; k <= kmax; ++k)
            f[k + kmax] = psi.interpolate(q + k * h) * std::conj(psi.interpolate(q - k * h));
        for (int j = 0; j < grid_p.n; ++j) {
            const double p = grid_p.at(j);
            cplx s = 0.0;
            const cplx step = std::exp(-2.0 * I * h * p);
            cplx e = std::exp(2.0 * I * double(kmax) * h * p);
            for (int k = 0; k <= 2 * kmax; ++k) {
                s += f[k] * e;
                e *= step;
            }
            out(i, j) = s * h / pi;
        }
    }
    return out;
}

/// Truncated Wigner approximation: the initial coherent-state Wigner function transported
/// along backward-flowed coordinates.
inline ComplexField2D twa(SystemId sys, PhasePoint center, double t, const UniformAxis& grid_q, const UniformAxis& grid_p) {
    ComplexField2D out(grid_q, grid_p);
    for (int i = 0; i < grid_q.n; ++i)
        for (int j = 0; j < grid_p.n; ++j) {
            const PhasePoint back = flow(sys, {grid_q.at(i), grid_p.at(j)}, -t).point;
            const double dq = back.q - center.q, dp = back.p - center.p;
            out(i, j) = std::exp(-dq * dq - dp * dp) / pi;
        }
    return out;
}

inline ComplexField2D twa(PhasePoint center, double t, const UniformAxis& grid_q, const UniformAxis& grid_p) {
    return twa(SystemId::Kerr, center, t, grid_q, grid_p);
}

/// 2 pi int W_a W_b dq dp; equals |<a|b>|^2 for exact Wigner functions.
inline double phase_space_overlap(const ComplexField2D& wa, const ComplexField2D& wb) {
    if (!(wa.x_axis == wb.x_axis) || !(wa.y_axis == wb.y_axis)) throw GridMismatch("Wigner grids differ");
    const auto wq = trapezoid_weights(wa.x_axis), wp = trapezoid_weights(wa.y_axis);
    double s = 0.0;
    for (int i = 0; i < wa.x_axis.n; ++i)
        for (int j = 0; j < wa.y_axis.n; ++j) s += wq[i] * wp[j] * (wa(i, j) * wb(i, j)).real();
    return 2 * pi * s;
}

inline double field_integral(const ComplexField2D& f) {
    const auto wq = trapezoid_weights(f.x_axis), wp = trapezoid_weights(f.y_axis);
    double s = 0.0;
    for (int i = 0; i < f.x_axis.n; ++i)
        for (int j = 0; j < f.y_axis.n; ++j) s += wq[i] * wp[j] * f(i, j).real();
    return s;
}

/// Phase-space-overlap autocorrelation from the TWA, 2 pi int W_TWA(t) W(0).
inline TimeSeries twa_overlap_series(SystemId sys, PhasePoint center, const std::vector<double>& ts, const GridSpec& grid) {
    const UniformAxis qa = grid.q_axis(), pa = grid.p_axis();
    const ComplexField2D w0 = twa(sys, center, 0.0, qa, pa);
    TimeSeries out{ts, {}};
    for (double t : ts) out.values.push_back(phase_space_overlap(twa(sys, center, t, qa, pa), w0));
    return out;
}

}  // namespace scprop
