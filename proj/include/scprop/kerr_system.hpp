#pragma once

#include <cmath>
#include <string>

#include "errors.hpp"
#include "grid.hpp"
#include "phase_complex.hpp"

namespace scprop {

/// Kerr: H = (p^2+q^2)^2. SHO: H = (p^2+q^2)/2, whose flow is rotation by t.
enum class SystemId { Kerr, SHO };

inline std::string to_string(SystemId s) { return s == SystemId::Kerr ? "kerr" : "sho"; }

struct FlowResult {
    PhasePoint point;
    Monodromy2 monodromy;
    double action_pos = 0.0;   // S(q', q; t)
    double action_weyl = 0.0;  // S_W(t)
};

struct KerrTimes {
    double t_rev = pi / 4;
    double t_ehr = 0.0;
};

inline double hamiltonian(SystemId sys, PhasePoint pt) {
    const double r2 = pt.q * pt.q + pt.p * pt.p;
    return sys == SystemId::Kerr ? r2 * r2 : 0.5 * r2;
}

inline double angular_frequency(PhasePoint pt) { return 4.0 * (pt.q * pt.q + pt.p * pt.p); }

inline KerrTimes characteristic_times(PhasePoint pt) {
    const double r2 = pt.q * pt.q + pt.p * pt.p;
    if (r2 == 0.0) throw DegenerateOrbit("Ehrenfest time undefined at the fixed point");
    return {pi / 4, pi / (2 * r2)};
}

/// Closed-form flow. For Kerr the rotation angle depends on the orbit, which brings the
/// 8 t q_i p' and 8 t q_i q' terms into the monodromy.
inline FlowResult flow(SystemId sys, PhasePoint pt, double t) {
    const double q = pt.q, p = pt.p, r2 = q * q + p * p;
    const double th = sys == SystemId::Kerr ? 4.0 * r2 * t : t;
    const double c = std::cos(th), s = std::sin(th);
    FlowResult out;
    out.point = {q * c + p * s, p * c - q * s};
    const double qp = out.point.q, pp = out.point.p;
    if (sys == SystemId::Kerr) {
        out.monodromy = {c + 8 * q * t * pp, s + 8 * p * t * pp, -s - 8 * q * t * qp, c - 8 * p * t * qp};
        out.action_weyl = r2 * r2 * t;
    } else {
        out.monodromy = {c, s, -s, c};
        out.action_weyl = 0.0;
    }
    out.action_pos = out.action_weyl + 0.5 * (qp * pp - q * p);
    return out;
}

/// Rotation angle swept by the orbit through pt after time t.
inline double orbit_angle(SystemId sys, PhasePoint pt, double t) {
    return sys == SystemId::Kerr ? angular_frequency(pt) * t : t;
}

/// Continuous arg of lambda along the trajectory, zero at t = 0.
/// Kerr: lambda = (1 - i theta) e^{-i theta}; SHO: lambda = e^{-i t}.
inline double lambda_phase(SystemId sys, PhasePoint pt, double t) {
    const double th = orbit_angle(sys, pt, t);
    return sys == SystemId::Kerr ? -th - std::atan(th) : -th;
}

/// sqrt(lambda) on the branch continuous from 1 at t = 0.
inline cplx sqrt_lambda(SystemId sys, PhasePoint pt, double t) {
    const double th = orbit_angle(sys, pt, t);
    const double mod = sys == SystemId::Kerr ? std::pow(1.0 + th * th, 0.25) : 1.0;
    return mod * std::exp(0.5 * I * lambda_phase(sys, pt, t));
}

/// Number of zeros of b(tau) on (0, t]. Writing b = R sin(theta + beta) with
/// beta = atan2(8 tau p^2, 1 - 8 tau q p), theta + beta increases monotonically from 0.
inline int caustic_count(SystemId sys, PhasePoint pt, double t) {
    if (t <= 0) return 0;
    if (sys == SystemId::SHO) return static_cast<int>(std::floor(t / pi));
    const double q = pt.q, p = pt.p;
    if (q == 0.0 && p == 0.0) return 0;
    const double phase = angular_frequency(pt) * t + std::atan2(8 * t * p * p, 1 - 8 * t * q * p);
    return static_cast<int>(std::floor(phase / pi));
}

}  // namespace scprop
