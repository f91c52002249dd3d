#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "errors.hpp"
#include "grid.hpp"
#include "kerr_system.hpp"

namespace scprop {

inline constexpr double default_eps_c = 0.05;

struct CausticMap {
    ComplexField2D field;  // real part holds b(q, p; t)
    double t = 0.0;
    double level_eps = 0.0;

    bool on_caustic(int i, int j) const { return std::abs(field(i, j).real()) < level_eps; }

    long caustic_pixels() const {
        long n = 0;
        for (const auto& v : field.values) n += std::abs(v.real()) < level_eps;
        return n;
    }
};

/// b = dq'/dp of the Kerr flow over a phase-space grid.
inline CausticMap caustic_map(double t, const GridSpec& grid, double level_eps) {
    if (!(t > 0)) throw InvalidArgument("caustic map needs t > 0");
    const UniformAxis qa = grid.q_axis(), pa = grid.p_axis();
    CausticMap out{ComplexField2D(qa, pa), t, level_eps};
#pragma omp parallel for
    for (int i = 0; i < qa.n; ++i)
        for (int j = 0; j < pa.n; ++j) out.field(i, j) = flow(SystemId::Kerr, {qa.at(i), pa.at(j)}, t).monodromy.b;
    return out;
}

/// b on the orbit of radius r at polar angle phi: sin(wt) + 8 r^2 t sin(phi) sin(phi - wt), w = 4 r^2.
inline double orbit_b(double radius, double phi, double t) {
    const double wt = 4 * radius * radius * t;
    return std::sin(wt) + 8 * radius * radius * t * std::sin(phi) * std::sin(phi - wt);
}

struct StickinessReport {
    double radius = 0.0;
    double t = 0.0;
    double eps_c = 0.0;
    double fraction = 0.0;
};

/// Angular fraction of the orbit with |b| < eps_c, midpoint rule in phi.
inline StickinessReport orbit_caustic_fraction(double radius, double t, double eps_c, int n_phi = 3600) {
    if (!(radius > 0)) throw InvalidArgument("orbit radius must be positive");
    if (n_phi < 360) throw SamplingTooCoarse("orbit fraction needs n_phi >= 360");
    long hits = 0;
    for (int k = 0; k < n_phi; ++k) {
        const double phi = 2 * pi * (k + 0.5) / n_phi;
        hits += std::abs(orbit_b(radius, phi, t)) < eps_c;
    }
    return {radius, t, eps_c, static_cast<double>(hits) / n_phi};
}

/// Rows ordered by time, then radius.
inline std::vector<StickinessReport> stickiness_scan(const std::vector<double>& radii, const std::vector<double>& ts,
                                                     double eps_c, int n_phi = 3600) {
    if (radii.empty() || ts.empty()) throw InvalidArgument("stickiness scan needs radii and times");
    std::vector<StickinessReport> out(radii.size() * ts.size());
#pragma omp parallel for
    for (long k = 0; k < static_cast<long>(out.size()); ++k)
        out[k] = orbit_caustic_fraction(radii[k % radii.size()], ts[k / radii.size()], eps_c, n_phi);
    return out;
}

inline double max_fraction_at(const std::vector<StickinessReport>& rows, double t) {
    double m = 0.0;
    for (const auto& r : rows)
        if (r.t == t) m = std::max(m, r.fraction);
    return m;
}

/// Radii k * (3 pi / 200), k = 1..n, covering the default phase window.
inline std::vector<double> default_radii(int n = 200) {
    std::vector<double> r(n);
    for (int k = 0; k < n; ++k) r[k] = (k + 1) * 3 * pi / 200;
    return r;
}

}  // namespace scprop
