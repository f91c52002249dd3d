#pragma once

#include <cmath>
#include <complex>

#include "errors.hpp"
#include "grid.hpp"

namespace scprop {

inline constexpr double tol_conj = 1e-9;
inline constexpr double tol_symp = 1e-9;

struct PhasePoint {
    double q = 0.0;
    double p = 0.0;
};

struct ComplexPhasePoint {
    cplx zeta;
    cplx zeta_star;
};

/// Tangent map of a 1-D flow: a = dq'/dq, b = dq'/dp, c = dp'/dq, d = dp'/dp.
struct Monodromy2 {
    double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

    double det() const { return a * d - b * c; }
    static Monodromy2 identity() { return {}; }
    static Monodromy2 rotation(double theta) {
        return {std::cos(theta), std::sin(theta), -std::sin(theta), std::cos(theta)};
    }
    PhasePoint apply(PhasePoint x) const { return {a * x.q + b * x.p, c * x.q + d * x.p}; }
};

inline Monodromy2 operator*(const Monodromy2& m2, const Monodromy2& m1) {
    return {m2.a * m1.a + m2.b * m1.c, m2.a * m1.b + m2.b * m1.d,
            m2.c * m1.a + m2.d * m1.c, m2.c * m1.b + m2.d * m1.d};
}

/// Complexified blocks. In the (zeta*, zeta) basis the map is [[lambda, gamma], [conj gamma, conj lambda]].
struct ComplexMonodromy {
    cplx lambda{1.0, 0.0};
    cplx gamma{0.0, 0.0};
};

inline ComplexPhasePoint complexify(PhasePoint pt) {
    const double s = 1.0 / std::sqrt(2.0);
    return {cplx(pt.p, pt.q) * s, cplx(pt.p, -pt.q) * s};
}

inline PhasePoint decomplexify(const ComplexPhasePoint& z, double tol = tol_conj) {
    if (std::abs(z.zeta_star - std::conj(z.zeta)) > tol)
        throw ConjugacyViolation("zeta_star is not the conjugate of zeta");
    const double s = 1.0 / std::sqrt(2.0);
    cplx q = I * (z.zeta_star - z.zeta) * s;
    cplx p = (z.zeta + z.zeta_star) * s;
    return {q.real(), p.real()};
}

inline ComplexMonodromy complexify_monodromy(const Monodromy2& m) {
    return {0.5 * cplx(m.d + m.a, m.c - m.b), 0.5 * cplx(m.d - m.a, -(m.c + m.b))};
}

/// Product of complexified maps, m2 applied after m1.
inline ComplexMonodromy compose(const ComplexMonodromy& m2, const ComplexMonodromy& m1) {
    return {m2.lambda * m1.lambda + m2.gamma * std::conj(m1.gamma),
            m2.lambda * m1.gamma + m2.gamma * std::conj(m1.lambda)};
}

inline bool check_symplectic(const Monodromy2& m, double tol) {
    if (!(tol > 0)) throw InvalidArgument("tolerance must be positive");
    return std::abs(m.det() - 1.0) <= tol;
}

/// |lambda|^2 - |gamma|^2, which is 1 for symplectic input.
inline double block_invariant(const ComplexMonodromy& cm) {
    return std::norm(cm.lambda) - std::norm(cm.gamma);
}

}  // namespace scprop
