#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "grid.hpp"
#include "phase_complex.hpp"

namespace scprop {

inline constexpr double eps_caustic = 1e-8;

/// S(q', q) for a free linear map (n = 1), with dS/dq = -p and dS/dq' = p'.
/// The q'^2 coefficient is d/b and the q^2 coefficient a/b for a = dq'/dq, d = dp'/dp.
inline double position_generating_function(const Monodromy2& m, double qprime, double q) {
    if (std::abs(m.b) <= eps_caustic) throw CausticSingular("b block vanishes");
    return 0.5 * (qprime * qprime * m.d / m.b + q * q * m.a / m.b - 2.0 * qprime * q / m.b);
}

inline cplx complex_generating_function(const ComplexMonodromy& cm, cplx zeta_star, cplx zeta_prime) {
    const cplx inv = 1.0 / cm.lambda;
    const cplx quad = zeta_prime * std::conj(cm.gamma) * inv * zeta_prime
                      - zeta_star * inv * cm.gamma * zeta_star
                      + 2.0 * zeta_star * inv * zeta_prime;
    return 0.5 * I * (std::norm(zeta_star) + std::norm(zeta_prime)) - 0.5 * I * quad;
}

/// sigma (2 pi)^{-1/2} |b|^{-1/2} exp(i S - i pi mu / 2). The (2 pi i)^{-1/2} phase of the
/// full propagator is left to the caller.
inline cplx metaplectic_kernel_position(const Monodromy2& m, int mu, int sigma, double xprime, double x) {
    if (sigma != 1 && sigma != -1) throw InvalidArgument("sigma must be +1 or -1");
    const double s = position_generating_function(m, xprime, x);
    return double(sigma) / std::sqrt(2 * pi * std::abs(m.b)) * std::exp(I * (s - pi * mu / 2.0));
}

/// Segal-Bargmann kernel; branch_phase is the continuously tracked arg of lambda.
inline cplx metaplectic_kernel_sb(const ComplexMonodromy& cm, double branch_phase, cplx zeta_prime, cplx zeta_star) {
    const cplx inv_sqrt = std::exp(-0.5 * I * branch_phase) / std::sqrt(std::abs(cm.lambda));
    return inv_sqrt * std::exp(I * complex_generating_function(cm, zeta_star, zeta_prime));
}

/// Exact harmonic-oscillator propagator (H = (p^2+q^2)/2), continued through caustics.
inline cplx mehler_kernel(double t, double xprime, double x) {
    const double s = std::sin(t);
    if (std::abs(s) <= eps_caustic) throw CausticSingular("Mehler kernel at a multiple of pi");
    const int mu = static_cast<int>(std::floor(t / pi));
    const double phase = ((xprime * xprime + x * x) * std::cos(t) - 2 * xprime * x) / (2 * s);
    return std::exp(-I * (pi / 4 + pi * mu / 2.0)) / std::sqrt(2 * pi * std::abs(s)) * std::exp(I * phase);
}

namespace detail {

inline cplx cohs_ket(double x, cplx z) {
    return std::pow(pi, -0.25) * std::exp(0.5 * (-x * x + 2.0 * I * std::sqrt(2.0) * z * x + z * z - std::norm(z)));
}
inline cplx cohs_bra(cplx zs, double x) {
    return std::pow(pi, -0.25) * std::exp(0.5 * (-x * x - 2.0 * I * std::sqrt(2.0) * zs * x + zs * zs - std::norm(zs)));
}

}  // namespace detail

/// Position kernel of m rebuilt as two inverse S-B transforms around the S-B kernel, by
/// quadrature over `grid` (both complex variables), compared against the closed-form position
/// kernel at the (x', x) pairs of `samples`. Returns the maximum absolute deviation.
///
/// The complex-coordinate coherent states place label zeta at the physical point (-q, p), so the
/// S-B kernel is evaluated at conjugated arguments with the blocks of the q-reflected map.
inline double verify_sb_composition(const Monodromy2& m, const GridSpec& grid,
                                    const UniformAxis& samples = UniformAxis(-0.5, 0.5, 5), int mu = 0) {
    if (std::abs(m.b) <= eps_caustic) throw CausticSingular("b block vanishes");
    const Monodromy2 r{m.a, -m.b, -m.c, m.d};
    const ComplexMonodromy cm = complexify_monodromy(r);
    const cplx lam = cm.lambda, gam = cm.gamma, inv = 1.0 / lam;

    const UniformAxis qa = grid.q_axis(), pa = grid.p_axis();
    const auto wq = trapezoid_weights(qa), wp = trapezoid_weights(pa);
    const int nq = qa.n, np_ = pa.n, nx = samples.n;
    const double s2 = 1.0 / std::sqrt(2.0);
    auto node = [&](int i, int j) { return cplx(pa.at(j), qa.at(i)) * s2; };

    // H(x, j; i): bra kernel times the zeta* dependent part of the S-B kernel and the weights.
    Eigen::MatrixXcd h(nx * np_, nq);
    for (int ix = 0; ix < nx; ++ix)
        for (int i = 0; i < nq; ++i)
            for (int j = 0; j < np_; ++j) {
                const cplx z = node(i, j), zc = std::conj(z);
                const cplx pre = std::exp(-0.5 * std::norm(z) - 0.5 * zc * zc * gam * inv);
                h(ix * np_ + j, i) = detail::cohs_bra(z, samples.at(ix)) * pre * (0.5 * wq[i] * wp[j]);
            }

    const int n_nodes = nq * np_;
    Eigen::MatrixXcd j_of(nx, n_nodes);  // J_x(zeta') = sum_zeta* exp(conj zeta' conj zeta* / lambda) H_x(zeta*)
    const int chunk = 2048;
    for (int k0 = 0; k0 < n_nodes; k0 += chunk) {
        const int kn = std::min(chunk, n_nodes - k0);
        Eigen::MatrixXcd b(nq, kn);
        Eigen::MatrixXcd a(np_, kn);
        for (int k = 0; k < kn; ++k) {
            const cplx zpc = std::conj(node((k0 + k) / np_, (k0 + k) % np_));
            for (int i = 0; i < nq; ++i) b(i, k) = std::exp(-I * zpc * qa.at(i) * s2 * inv);
            for (int j = 0; j < np_; ++j) a(j, k) = std::exp(zpc * pa.at(j) * s2 * inv);
        }
        Eigen::MatrixXcd t = h * b;  // (nx * np, kn)
        for (int ix = 0; ix < nx; ++ix)
            for (int k = 0; k < kn; ++k) {
                cplx acc = 0.0;
                for (int j = 0; j < np_; ++j) acc += a(j, k) * t(ix * np_ + j, k);
                j_of(ix, k0 + k) = acc;
            }
    }

    const cplx norm = 1.0 / (pi * pi * std::sqrt(lam));
    const cplx ref_phase = std::exp(-I * pi / 4.0);
    double dev = 0.0;
    for (int jx = 0; jx < nx; ++jx) {
        const double xp = samples.at(jx);
        std::vector<cplx> out_w(n_nodes);
        for (int i = 0; i < nq; ++i)
            for (int j = 0; j < np_; ++j) {
                const cplx z = node(i, j), zc = std::conj(z);
                const cplx pre = std::exp(-0.5 * std::norm(z) + 0.5 * zc * zc * std::conj(gam) * inv);
                out_w[i * np_ + j] = detail::cohs_ket(xp, z) * pre * (0.5 * wq[i] * wp[j]);
            }
        for (int ix = 0; ix < nx; ++ix) {
            cplx acc = 0.0;
            for (int k = 0; k < n_nodes; ++k) acc += out_w[k] * j_of(ix, k);
            const cplx composed = acc * norm;
            const cplx exact = ref_phase * metaplectic_kernel_position(m, mu, 1, xp, samples.at(ix));
            dev = std::max(dev, std::abs(composed - exact));
        }
    }
    return dev;
}

}  // namespace scprop
