#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "grid.hpp"
#include "kerr_system.hpp"
#include "parallel.hpp"
#include "phase_complex.hpp"
#include "quantum_reference.hpp"
#include "root_search.hpp"

namespace scprop {

/// Principal branch of (2 pi i)^{-1/2}.
inline cplx vvg_prefactor() { return std::exp(-I * pi / 4.0) / std::sqrt(2 * pi); }

/// Coherent-state pair of one phase-space point: start (q, p) and its image at time t.
struct CoherentKernelPair {
    PhasePoint center;
    PhasePoint evolved;
    double t = 0.0;
};

namespace detail {

/// sum_{j=j0..j1} g_j <x_j | q, p> with <x|q,p> = pi^{-1/4} exp(-(x-q)^2/2 + i p (x - q/2)).
/// Consecutive gaussian samples differ by a ratio that itself decays by e^{-h^2}, so only
/// two exponentials are needed per call.
inline cplx ket_sum(const UniformAxis& ax, const cplx* g, int j0, int j1, double q, double p) {
    const double h = ax.step();
    const double x0 = ax.lo + j0 * h;
    cplx val = std::exp(cplx(-0.5 * (x0 - q) * (x0 - q), p * (x0 - 0.5 * q)));
    cplx ratio = std::exp(cplx(-h * (x0 - q) - 0.5 * h * h, p * h));
    const double decay = std::exp(-h * h);
    cplx s = 0.0;
    for (int j = j0; j <= j1; ++j) {
        s += g[j] * val;
        val *= ratio;
        ratio *= decay;
    }
    return s * std::pow(pi, -0.25);
}

inline cplx coherent_ket(double x, double q, double p) {
    return std::pow(pi, -0.25) * std::exp(cplx(-0.5 * (x - q) * (x - q), p * (x - 0.5 * q)));
}

/// Index range of the samples with |psi| above a relative threshold.
inline std::pair<int, int> support(const WaveFunction& psi, double rel = 1e-14) {
    double m = 0.0;
    for (auto v : psi.values) m = std::max(m, std::abs(v));
    int a = 0, b = psi.grid.n - 1;
    while (a < b && std::abs(psi.values[a]) <= rel * m) ++a;
    while (b > a && std::abs(psi.values[b]) <= rel * m) --b;
    return {a, b};
}

struct PhaseNode {
    PhasePoint pt;
    double weight;
};

inline std::vector<PhaseNode> phase_nodes(const GridSpec& g) {
    const UniformAxis qa = g.q_axis(), pa = g.p_axis();
    const auto wq = trapezoid_weights(qa), wp = trapezoid_weights(pa);
    std::vector<PhaseNode> nodes;
    nodes.reserve(static_cast<size_t>(qa.n) * pa.n);
    for (int i = 0; i < qa.n; ++i)
        for (int j = 0; j < pa.n; ++j) nodes.push_back({{qa.at(i), pa.at(j)}, wq[i] * wp[j]});
    return nodes;
}

}  // namespace detail

struct VvgStats {
    long roots = 0;
    long caustic_excluded = 0;
};

/// Contribution of one root trajectory to the van Vleck-Gutzwiller sum.
inline cplx vvg_term(const TrajectoryRecord& r) {
    return vvg_prefactor() / std::sqrt(std::abs(r.b_entry)) * std::exp(I * (r.action_pos - pi * r.maslov / 2.0));
}

/// van Vleck-Gutzwiller propagator K(x', x; t); rows are x', columns x.
/// Pixels without roots are 0; roots with |b| < eps_caustic are dropped and counted.
inline ComplexField2D vvg_propagator(SystemId sys, const UniformAxis& xp_axis, const UniformAxis& x_axis, double t,
                                     const RootSearchParams& prm, VvgStats* stats = nullptr) {
    if (!(t > 0)) throw InvalidArgument("vV-G propagator needs t > 0");
    ComplexField2D out(xp_axis, x_axis);
    std::vector<VvgStats> per_col(x_axis.n);
#pragma omp parallel for schedule(dynamic)
    for (int j = 0; j < x_axis.n; ++j) {
        const auto roots = find_roots_column(sys, x_axis.at(j), t, xp_axis, prm);
        for (int i = 0; i < xp_axis.n; ++i) {
            cplx s = 0.0;
            for (const auto& r : roots[i]) {
                if (r.on_caustic()) {
                    ++per_col[j].caustic_excluded;
                    continue;
                }
                ++per_col[j].roots;
                s += vvg_term(r);
            }
            out(i, j) = s;
        }
    }
    if (stats)
        for (const auto& c : per_col) {
            stats->roots += c.roots;
            stats->caustic_excluded += c.caustic_excluded;
        }
    return out;
}

/// Herman-Kluk propagator by trapezoid quadrature over the phase grid:
/// K = (2 pi)^{-1} sum w sqrt(lambda) e^{i S_W} <x'|q',p'> <q,p|x>.
inline ComplexField2D hk_propagator(SystemId sys, const UniformAxis& xp_axis, const UniformAxis& x_axis, double t,
                                    const GridSpec& phase_grid) {
    if (t < 0) throw InvalidArgument("H-K propagator needs t >= 0");
    const auto nodes = detail::phase_nodes(phase_grid);
    const int n_nodes = static_cast<int>(nodes.size());
    const double norm = 1.0 / (2 * pi);
    Eigen::MatrixXcd k = Eigen::MatrixXcd::Zero(xp_axis.n, x_axis.n);
    const int chunk = 4096;
    for (int k0 = 0; k0 < n_nodes; k0 += chunk) {
        const int kn = std::min(chunk, n_nodes - k0);
        Eigen::MatrixXcd a(xp_axis.n, kn), b(kn, x_axis.n);
#pragma omp parallel for
        for (int c = 0; c < kn; ++c) {
            const auto& nd = nodes[k0 + c];
            const FlowResult f = flow(sys, nd.pt, t);
            const cplx weight = norm * nd.weight * sqrt_lambda(sys, nd.pt, t) * std::exp(I * f.action_weyl);
            for (int i = 0; i < xp_axis.n; ++i)
                a(i, c) = weight * detail::coherent_ket(xp_axis.at(i), f.point.q, f.point.p);
            for (int j = 0; j < x_axis.n; ++j)
                b(c, j) = std::conj(detail::coherent_ket(x_axis.at(j), nd.pt.q, nd.pt.p));
        }
        k.noalias() += a * b;
    }
    ComplexField2D out(xp_axis, x_axis);
    for (int i = 0; i < xp_axis.n; ++i)
        for (int j = 0; j < x_axis.n; ++j) out(i, j) = k(i, j);
    return out;
}

/// psi(x') = sum_x w_x K(x', x) psi0(x).
inline WaveFunction propagate_wavefunction(const ComplexField2D& kernel, const WaveFunction& psi0) {
    if (!(kernel.y_axis == psi0.grid)) throw GridMismatch("kernel x-axis differs from the wave-function grid");
    const auto w = trapezoid_weights(psi0.grid);
    WaveFunction out{kernel.x_axis, std::vector<cplx>(kernel.x_axis.n)};
    for (int i = 0; i < kernel.x_axis.n; ++i) {
        cplx s = 0.0;
        for (int j = 0; j < psi0.grid.n; ++j) s += w[j] * kernel(i, j) * psi0.values[j];
        out.values[i] = s;
    }
    return out;
}

/// Herman-Kluk applied directly to a wave function, without forming the kernel.
inline WaveFunction hk_propagate(SystemId sys, const WaveFunction& psi0, const UniformAxis& xp_axis, double t,
                                 const GridSpec& phase_grid) {
    const auto nodes = detail::phase_nodes(phase_grid);
    const auto w = trapezoid_weights(psi0.grid);
    std::vector<cplx> g(psi0.grid.n);
    for (int j = 0; j < psi0.grid.n; ++j) g[j] = std::conj(psi0.values[j]) * w[j];
    const auto [j0, j1] = detail::support(psi0);
    std::vector<cplx> coef(nodes.size());
    std::vector<PhasePoint> img(nodes.size());
#pragma omp parallel for
    for (size_t c = 0; c < nodes.size(); ++c) {
        const auto& nd = nodes[c];
        const cplx ov = std::conj(detail::ket_sum(psi0.grid, g.data(), j0, j1, nd.pt.q, nd.pt.p));
        const FlowResult f = flow(sys, nd.pt, t);
        img[c] = f.point;
        coef[c] = ov * nd.weight / (2 * pi) * sqrt_lambda(sys, nd.pt, t) * std::exp(I * f.action_weyl);
    }
    WaveFunction out{xp_axis, std::vector<cplx>(xp_axis.n)};
#pragma omp parallel for
    for (int i = 0; i < xp_axis.n; ++i) {
        cplx s = 0.0;
        for (size_t c = 0; c < nodes.size(); ++c)
            if (coef[c] != 0.0) s += coef[c] * detail::coherent_ket(xp_axis.at(i), img[c].q, img[c].p);
        out.values[i] = s;
    }
    return out;
}

/// <psi|U_HK(t)|psi> for every t, reusing the initial overlaps across times.
inline TimeSeries hk_autocorrelation(SystemId sys, const WaveFunction& psi, const std::vector<double>& ts,
                                     const GridSpec& phase_grid) {
    const auto nodes = detail::phase_nodes(phase_grid);
    const auto w = trapezoid_weights(psi.grid);
    std::vector<cplx> g(psi.grid.n);
    for (int j = 0; j < psi.grid.n; ++j) g[j] = std::conj(psi.values[j]) * w[j];
    const auto [j0, j1] = detail::support(psi);
    std::vector<cplx> ov_in(nodes.size());
    double m = 0.0;
    for (size_t c = 0; c < nodes.size(); ++c) {
        ov_in[c] = std::conj(detail::ket_sum(psi.grid, g.data(), j0, j1, nodes[c].pt.q, nodes[c].pt.p)) * nodes[c].weight;
        m = std::max(m, std::abs(ov_in[c]));
    }
    std::vector<size_t> active;
    for (size_t c = 0; c < nodes.size(); ++c)
        if (std::abs(ov_in[c]) > 1e-15 * m) active.push_back(c);
    TimeSeries out{ts, std::vector<cplx>(ts.size())};
#pragma omp parallel for schedule(dynamic)
    for (size_t it = 0; it < ts.size(); ++it) {
        const double t = ts[it];
        cplx s = 0.0;
        for (size_t c : active) {
            const FlowResult f = flow(sys, nodes[c].pt, t);
            const cplx ov_out = detail::ket_sum(psi.grid, g.data(), j0, j1, f.point.q, f.point.p);
            s += ov_in[c] * ov_out * sqrt_lambda(sys, nodes[c].pt, t) * std::exp(I * f.action_weyl);
        }
        out.values[it] = s / (2 * pi);
    }
    return out;
}

/// Position-IVR matrix elements <bra|U(t)|ket> over many times. The ket is linearly
/// interpolated at the flowed positions, zero outside its grid.
inline TimeSeries ivr_series(SystemId sys, const WaveFunction& bra, const WaveFunction& ket, const std::vector<double>& ts,
                             const GridSpec& phase_grid) {
    const UniformAxis qa = phase_grid.q_axis(), pa = phase_grid.p_axis();
    const auto wq = trapezoid_weights(qa), wp = trapezoid_weights(pa);
    std::vector<cplx> bq(qa.n);
    for (int i = 0; i < qa.n; ++i) bq[i] = std::conj(bra.interpolate(qa.at(i))) * wq[i];
    TimeSeries out{ts, std::vector<cplx>(ts.size())};
#pragma omp parallel for schedule(dynamic)
    for (size_t it = 0; it < ts.size(); ++it) {
        const double t = ts[it];
        if (!(t > 0)) {
            // the kernel is a delta at t = 0
            const auto w = trapezoid_weights(bra.grid);
            cplx s = 0.0;
            for (int i = 0; i < bra.grid.n; ++i) s += w[i] * std::conj(bra.values[i]) * ket.interpolate(bra.grid.at(i));
            out.values[it] = s;
            continue;
        }
        cplx s = 0.0;
        for (int i = 0; i < qa.n; ++i) {
            if (bq[i] == 0.0) continue;
            cplx row = 0.0;
            for (int j = 0; j < pa.n; ++j) {
                const PhasePoint pt{qa.at(i), pa.at(j)};
                const FlowResult f = flow(sys, pt, t);
                const cplx kv = ket.interpolate(f.point.q);
                if (kv == 0.0) continue;
                const double amp = std::sqrt(std::abs(f.monodromy.b));
                row += wp[j] * amp * std::exp(I * (f.action_pos - pi * caustic_count(sys, pt, t) / 2.0)) * kv;
            }
            s += bq[i] * row;
        }
        out.values[it] = vvg_prefactor() * s;
    }
    return out;
}

inline cplx ivr_matrix_element(SystemId sys, const WaveFunction& bra, const WaveFunction& ket, double t, const GridSpec& phase_grid) {
    return ivr_series(sys, bra, ket, {t}, phase_grid).values[0];
}

/// <psi|K_vVG(t)|psi> restricted to the support of psi.
inline TimeSeries vvg_autocorrelation(SystemId sys, const WaveFunction& psi, const std::vector<double>& ts,
                                      const RootSearchParams& prm, VvgStats* stats = nullptr) {
    const auto w = trapezoid_weights(psi.grid);
    const auto [j0, j1] = detail::support(psi);
    TimeSeries out{ts, std::vector<cplx>(ts.size())};
    std::vector<VvgStats> per_t(ts.size());
#pragma omp parallel for schedule(dynamic)
    for (size_t it = 0; it < ts.size(); ++it) {
        const double t = ts[it];
        if (!(t > 0)) {
            // t = 0 is the universal caustic; the kernel is a delta and C(0) = <psi|psi>.
            out.values[it] = psi.norm_squared();
            continue;
        }
        cplx s = 0.0;
        for (int j = j0; j <= j1; ++j) {
            const auto roots = find_roots_column(sys, psi.grid.at(j), t, psi.grid, prm, j0, j1);
            cplx col = 0.0;
            for (int i = j0; i <= j1; ++i)
                for (const auto& r : roots[i]) {
                    if (r.on_caustic()) {
                        ++per_t[it].caustic_excluded;
                        continue;
                    }
                    ++per_t[it].roots;
                    col += std::conj(psi.values[i]) * w[i] * vvg_term(r);
                }
            s += col * psi.values[j] * w[j];
        }
        out.values[it] = s;
    }
    if (stats)
        for (const auto& c : per_t) {
            stats->roots += c.roots;
            stats->caustic_excluded += c.caustic_excluded;
        }
    return out;
}

enum class Method { VVG, IVR, HK, Quantum };

inline std::string to_string(Method m) {
    switch (m) {
        case Method::VVG: return "vvg";
        case Method::IVR: return "ivr";
        case Method::HK: return "hk";
        default: return "quantum";
    }
}

struct AutocorrConfig {
    SystemId system = SystemId::Kerr;
    UniformAxis x_axis{-3 * pi, 3 * pi, 201};
    GridSpec hk_grid{201, 201, -3 * pi, 3 * pi};
    GridSpec ivr_grid{1001, 1001, -3 * pi, 3 * pi};
    RootSearchParams roots = RootSearchParams::for_grid(UniformAxis(-3 * pi, 3 * pi, 201), -3 * pi, 3 * pi, 201);
    int n_max = -1;  // Fock cutoff for the quantum reference; -1 sizes it from the centre
};

/// C(t) = <psi|U(t)|psi> for the coherent state centred at `center`.
inline TimeSeries autocorrelation(Method method, PhasePoint center, const std::vector<double>& ts, const AutocorrConfig& cfg = {}) {
    for (size_t k = 0; k < ts.size(); ++k)
        if (ts[k] < 0 || (k > 0 && !(ts[k] > ts[k - 1]))) throw InvalidArgument("times must be increasing and non-negative");
    if (method == Method::Quantum) {
        if (cfg.system != SystemId::Kerr) throw InvalidArgument("the Fock-sum reference is Kerr only");
        const FockExpansion st = cfg.n_max >= 0 ? coherent_state_fock(center, cfg.n_max) : coherent_state_fock(center);
        TimeSeries out{ts, {}};
        for (double t : ts) out.values.push_back(quantum_autocorrelation(st, t));
        return out;
    }
    const WaveFunction psi = coherent_wavefunction(center, cfg.x_axis);
    switch (method) {
        case Method::HK: return hk_autocorrelation(cfg.system, psi, ts, cfg.hk_grid);
        case Method::IVR: return ivr_series(cfg.system, psi, psi, ts, cfg.ivr_grid);
        default: return vvg_autocorrelation(cfg.system, psi, ts, cfg.roots);
    }
}

/// ||C(t)| - |C_ref(t)|| / |C_ref(t)| sample by sample.
inline std::vector<double> modulus_relative_error(const TimeSeries& approx, const TimeSeries& ref) {
    if (approx.values.size() != ref.values.size()) throw GridMismatch("series lengths differ");
    std::vector<double> e(ref.values.size());
    for (size_t k = 0; k < e.size(); ++k)
        e[k] = std::abs(std::abs(approx.values[k]) - std::abs(ref.values[k])) / std::abs(ref.values[k]);
    return e;
}

/// Integral form of the root search: returns (lhs, rhs) with
/// lhs = int dp g_sigma(q'(q,p,t) - x') |dq'/dp|^{1/2} and rhs = sum over roots |dq'/dp|^{-1/2}.
inline std::pair<double, double> verify_delta_composition(SystemId sys, double q, double xprime, double t,
                                                          const RootSearchParams& prm, double mollifier_width) {
    if (!(mollifier_width > 0)) throw InvalidArgument("mollifier width must be positive");
    double rhs = 0.0;
    try {
        for (const auto& r : find_roots(sys, q, xprime, t, prm))
            if (!r.on_caustic()) rhs += 1.0 / std::sqrt(std::abs(r.b_entry));
    } catch (const EmptyWindow&) {
    }
    double bmax = 0.0;
    for (int k = 0; k < prm.p_samples; ++k)
        bmax = std::max(bmax, std::abs(flow(sys, {q, prm.p_lo + k * prm.p_step()}, t).monodromy.b));
    // at least 16 samples across the narrowest mollified peak
    const double width_p = mollifier_width / std::max(bmax, 1e-3);
    const long n = std::clamp<long>(static_cast<long>(std::ceil(16.0 * (prm.p_hi - prm.p_lo) / width_p)), 1000L, 50000000L);
    const double h = (prm.p_hi - prm.p_lo) / n;
    const double norm = 1.0 / (mollifier_width * std::sqrt(2 * pi));
    double lhs = 0.0;
    for (long k = 0; k <= n; ++k) {
        const double p = prm.p_lo + k * h;
        const FlowResult f = flow(sys, {q, p}, t);
        const double u = (f.point.q - xprime) / mollifier_width;
        if (std::abs(u) > 40) continue;
        const double wk = (k == 0 || k == n) ? 0.5 * h : h;
        lhs += wk * norm * std::exp(-0.5 * u * u) * std::sqrt(std::abs(f.monodromy.b));
    }
    return {lhs, rhs};
}

}  // namespace scprop
