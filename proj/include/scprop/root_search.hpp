#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "errors.hpp"
#include "grid.hpp"
#include "kerr_system.hpp"
#include "linear_metaplectic.hpp"
#include "phase_complex.hpp"

namespace scprop {

struct RootSearchParams {
    double eps = 3 * pi / 100;    // final-position acceptance radius
    double delta = 6 * pi / 100;  // momentum clustering radius
    double p_lo = -3 * pi;
    double p_hi = 3 * pi;
    int p_samples = 201;

    double p_step() const { return (p_hi - p_lo) / (p_samples - 1); }
    void validate() const {
        if (!(eps > 0) || !(delta > 0) || p_samples < 2 || !(p_hi > p_lo))
            throw InvalidArgument("root search needs eps > 0, delta > 0, p_samples >= 2 and a nonempty window");
    }

    /// eps = position grid spacing, delta = twice the momentum scan spacing.
    static RootSearchParams for_grid(const UniformAxis& x_axis, double p_lo, double p_hi, int p_samples) {
        RootSearchParams r;
        r.p_lo = p_lo;
        r.p_hi = p_hi;
        r.p_samples = p_samples;
        r.eps = x_axis.step();
        r.delta = 2 * r.p_step();
        return r;
    }
};

struct TrajectoryRecord {
    PhasePoint initial;
    double t = 0.0;
    PhasePoint final;
    double action_pos = 0.0;
    int maslov = 0;
    double b_entry = 0.0;
    bool refined = false;  // obtained by bisection on a bracketed sign change

    bool on_caustic() const { return std::abs(b_entry) < eps_caustic; }
};

inline TrajectoryRecord make_record(SystemId sys, PhasePoint start, double t, bool refined) {
    const FlowResult f = flow(sys, start, t);
    TrajectoryRecord r;
    r.initial = start;
    r.t = t;
    r.final = f.point;
    r.action_pos = f.action_pos;
    r.maslov = caustic_count(sys, start, t);
    r.b_entry = f.monodromy.b;
    r.refined = refined;
    return r;
}

/// Bisection of q'(q, p, t) - x' on a bracket [lo, hi] down to `tol` in p.
inline double bisect_momentum(SystemId sys, double q, double xprime, double t, double lo, double hi, double tol = 1e-12) {
    double flo = flow(sys, {q, lo}, t).point.q - xprime;
    for (int it = 0; it < 200 && hi - lo > tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = flow(sys, {q, mid}, t).point.q - xprime;
        if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

/// Merges records whose initial momenta lie within delta, keeping the better-converged one.
/// Two bisection-refined roots are never merged: each brackets its own sign change.
inline std::vector<TrajectoryRecord> cluster_roots(std::vector<TrajectoryRecord> recs, double delta) {
    std::sort(recs.begin(), recs.end(), [](const auto& a, const auto& b) { return a.initial.p < b.initial.p; });
    std::vector<TrajectoryRecord> out;
    auto residual = [](const TrajectoryRecord& r, double target) { return std::abs(r.final.q - target); };
    for (const auto& r : recs) {
        if (out.empty() || std::abs(r.initial.p - out.back().initial.p) >= delta ||
            (r.refined && out.back().refined)) {
            out.push_back(r);
            continue;
        }
        TrajectoryRecord& kept = out.back();
        // Both share the same x' target; the refined one, or the smaller residual, wins.
        const double target = kept.refined ? kept.final.q : r.final.q;
        if (r.refined && !kept.refined)
            kept = r;
        else if (!r.refined && !kept.refined && residual(r, target) < residual(kept, target))
            kept = r;
    }
    return out;
}

namespace detail {

/// Near misses are only kept where |f - x'| has a local minimum over the scan; on a
/// monotone slope the bracketed root already accounts for them.
inline bool local_min(const std::vector<double>& f, int k, double xp) {
    const double r = std::abs(f[k] - xp);
    if (k > 0 && std::abs(f[k - 1] - xp) < r) return false;
    if (k + 1 < static_cast<int>(f.size()) && std::abs(f[k + 1] - xp) < r) return false;
    return true;
}

}  // namespace detail

/// All initial momenta p with q'(q, p, t) = x', by scan, bisection of sign changes and
/// acceptance of scan samples within eps.
inline std::vector<TrajectoryRecord> find_roots(SystemId sys, double q, double xprime, double t, const RootSearchParams& prm) {
    prm.validate();
    if (!(t > 0)) throw InvalidArgument("root search needs t > 0");
    const int n = prm.p_samples;
    std::vector<double> ps(n), f(n);
    for (int k = 0; k < n; ++k) {
        ps[k] = k == n - 1 ? prm.p_hi : prm.p_lo + k * prm.p_step();
        f[k] = flow(sys, {q, ps[k]}, t).point.q - xprime;
    }
    std::vector<TrajectoryRecord> recs;
    bool any_bracket = false;
    for (int k = 0; k + 1 < n; ++k) {
        if (f[k] == 0.0) {
            recs.push_back(make_record(sys, {q, ps[k]}, t, true));
            any_bracket = true;
        } else if ((f[k] < 0) != (f[k + 1] < 0) && f[k + 1] != 0.0) {
            const double p = bisect_momentum(sys, q, xprime, t, ps[k], ps[k + 1]);
            recs.push_back(make_record(sys, {q, p}, t, true));
            any_bracket = true;
        }
    }
    if (f[n - 1] == 0.0) {
        recs.push_back(make_record(sys, {q, ps[n - 1]}, t, true));
        any_bracket = true;
    }
    bool any_hit = false;
    for (int k = 0; k < n; ++k)
        if (std::abs(f[k]) < prm.eps && f[k] != 0.0 && detail::local_min(f, k, 0.0)) {
            recs.push_back(make_record(sys, {q, ps[k]}, t, false));
            any_hit = true;
        }
    if (!any_bracket && !any_hit) throw EmptyWindow("no trajectory reaches x' from q inside the momentum window");
    return cluster_roots(std::move(recs), prm.delta);
}

/// Root search for one initial position q against every x' of an axis at once.
/// Entry j holds the clustered records for x'_j; empty entries are legitimate.
inline std::vector<std::vector<TrajectoryRecord>> find_roots_column(SystemId sys, double q, double t, const UniformAxis& xp_axis,
                                                                    const RootSearchParams& prm, int j_lo = 0, int j_hi = -1) {
    prm.validate();
    if (j_hi < 0) j_hi = xp_axis.n - 1;
    const int n = prm.p_samples;
    const double hx = xp_axis.step();
    std::vector<double> ps(n), f(n);
    for (int k = 0; k < n; ++k) {
        ps[k] = k == n - 1 ? prm.p_hi : prm.p_lo + k * prm.p_step();
        f[k] = flow(sys, {q, ps[k]}, t).point.q;
    }
    std::vector<std::vector<TrajectoryRecord>> raw(xp_axis.n);
    auto index_range = [&](double lo, double hi, int& a, int& b) {
        a = std::max(j_lo, static_cast<int>(std::ceil((lo - xp_axis.lo) / hx - 1e-12)));
        b = std::min(j_hi, static_cast<int>(std::floor((hi - xp_axis.lo) / hx + 1e-12)));
    };
    for (int k = 0; k + 1 < n; ++k) {
        int a, b;
        index_range(std::min(f[k], f[k + 1]), std::max(f[k], f[k + 1]), a, b);
        for (int j = a; j <= b; ++j) {
            const double xp = xp_axis.at(j);
            const double fa = f[k] - xp, fb = f[k + 1] - xp;
            if (fb == 0.0) continue;  // picked up by the next interval
            if (fa != 0.0 && (fa < 0) == (fb < 0)) continue;
            const double p = fa == 0.0 ? ps[k] : bisect_momentum(sys, q, xp, t, ps[k], ps[k + 1]);
            raw[j].push_back(make_record(sys, {q, p}, t, true));
        }
    }
    {
        int a, b;
        index_range(f[n - 1], f[n - 1], a, b);
        for (int j = a; j <= b; ++j)
            if (f[n - 1] == xp_axis.at(j)) raw[j].push_back(make_record(sys, {q, ps[n - 1]}, t, true));
    }
    for (int k = 0; k < n; ++k) {
        int a, b;
        index_range(f[k] - prm.eps, f[k] + prm.eps, a, b);
        for (int j = a; j <= b; ++j) {
            const double r = std::abs(f[k] - xp_axis.at(j));
            if (r < prm.eps && r != 0.0 && detail::local_min(f, k, xp_axis.at(j))) raw[j].push_back(make_record(sys, {q, ps[k]}, t, false));
        }
    }
    for (int j = j_lo; j <= j_hi; ++j)
        if (raw[j].size() > 1) raw[j] = cluster_roots(std::move(raw[j]), prm.delta);
    return raw;
}

/// At least 40 samples per orbital period plus a floor.
inline int default_track_steps(SystemId sys, PhasePoint pt, double t) {
    const double w = sys == SystemId::Kerr ? angular_frequency(pt) + 8 * (pt.p * pt.p + std::abs(pt.q * pt.p)) : 1.0;
    return static_cast<int>(std::ceil(40.0 * w * std::abs(t) / (2 * pi))) + 16;
}

namespace detail {

inline double b_of(SystemId sys, PhasePoint pt, double tau) { return flow(sys, pt, tau).monodromy.b; }

/// Samples of b this small are zeros up to the rounding of the closed-form flow.
inline double b_roundoff(SystemId sys, PhasePoint pt, double tau) {
    const double r2 = pt.q * pt.q + pt.p * pt.p;
    return 1e-12 * (sys == SystemId::Kerr ? 1.0 + 8.0 * r2 * std::abs(tau) : 1.0);
}

inline double bisect_b(SystemId sys, PhasePoint pt, double lo, double hi) {
    double flo = b_of(sys, pt, lo);
    for (int it = 0; it < 100 && hi - lo > 1e-14 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = b_of(sys, pt, mid);
        if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

/// Times of the zeros of b(tau) = dq'/dp on (0, t], from sampled sign changes and bisection.
/// Each step is checked at its midpoint; two sign changes in one step mean the sampling is too coarse.
inline std::vector<double> caustic_times(SystemId sys, PhasePoint pt, double t, int n_steps) {
    if (n_steps < 1) throw InvalidArgument("n_steps must be positive");
    std::vector<double> out;
    if (!(t > 0)) return out;
    if (pt.q == 0.0 && pt.p == 0.0 && sys == SystemId::Kerr) return out;  // b vanishes identically
    const double h = t / n_steps;
    // b > 0 just after tau = 0 for every non-degenerate orbit.
    double prev_tau = 0.0, prev_b = 1.0;
    for (int k = 1; k <= n_steps; ++k) {
        const double tau = k == n_steps ? t : k * h;
        const double bk = detail::b_of(sys, pt, tau);
        const double bm = detail::b_of(sys, pt, 0.5 * (prev_tau + tau));
        const int changes = int((bm < 0) != (prev_b < 0)) + int((bk < 0) != (bm < 0));
        if (changes > 1) throw SamplingTooCoarse("more than one caustic inside a time step; refine n_steps");
        if (std::abs(bk) <= detail::b_roundoff(sys, pt, tau)) {
            out.push_back(tau);
            // keep the sign seen just before the zero so the next step starts consistently
            prev_b = -prev_b;
        } else if (changes == 1) {
            out.push_back(detail::bisect_b(sys, pt, prev_tau, tau));
            prev_b = bk;
        } else {
            prev_b = bk;
        }
        prev_tau = tau;
    }
    return out;
}

inline int maslov_index(SystemId sys, PhasePoint pt, double t, int n_steps) {
    return static_cast<int>(caustic_times(sys, pt, t, n_steps).size());
}

inline int maslov_index(SystemId sys, PhasePoint pt, double t) {
    return maslov_index(sys, pt, t, default_track_steps(sys, pt, t));
}

struct BranchTrack {
    std::vector<double> t_samples;
    std::vector<double> lambda_args;  // unwrapped arg of lambda, zero at tau = 0
    std::vector<double> lambda_abs;

    cplx sqrt_lambda(size_t k) const { return std::sqrt(lambda_abs[k]) * std::exp(0.5 * I * lambda_args[k]); }
};

namespace detail {

inline cplx lambda_of(SystemId sys, PhasePoint pt, double tau) {
    return complexify_monodromy(flow(sys, pt, tau).monodromy).lambda;
}

inline double wrapped(double d) { return std::remainder(d, 2 * pi); }

}  // namespace detail

/// Continuous arg of lambda over explicit increasing times starting at 0.
inline BranchTrack track_branch_times(SystemId sys, PhasePoint pt, const std::vector<double>& times) {
    if (times.empty() || times.front() != 0.0) throw InvalidArgument("branch tracking starts at tau = 0");
    // |d arg(lambda)/dtau| <= 2 omega for Kerr and 1 for the SHO; a step allowing more than pi
    // could alias, which no sample-based check can see.
    const double rate = sys == SystemId::Kerr ? 2.0 * angular_frequency(pt) : 1.0;
    for (size_t k = 1; k < times.size(); ++k)
        if (rate * (times[k] - times[k - 1]) > pi) throw PhaseJumpTooLarge("time step too long for the orbit frequency");
    BranchTrack tr;
    tr.t_samples = times;
    tr.lambda_args.reserve(times.size());
    tr.lambda_abs.reserve(times.size());
    double acc = 0.0, prev_raw = 0.0;
    for (size_t k = 0; k < times.size(); ++k) {
        const cplx lam = detail::lambda_of(sys, pt, times[k]);
        const double raw = std::arg(lam);
        if (k > 0) {
            const double step = detail::wrapped(raw - prev_raw);
            const double raw_mid = std::arg(detail::lambda_of(sys, pt, 0.5 * (times[k - 1] + times[k])));
            const double halves = detail::wrapped(raw_mid - prev_raw) + detail::wrapped(raw - raw_mid);
            if (std::abs(halves - step) > pi) throw PhaseJumpTooLarge("arg lambda jumps by more than pi in one step");
            acc += step;
        }
        prev_raw = raw;
        tr.lambda_args.push_back(acc);
        tr.lambda_abs.push_back(std::abs(lam));
    }
    return tr;
}

inline BranchTrack track_branch(SystemId sys, PhasePoint pt, double t, int n_steps) {
    if (n_steps < 1) throw InvalidArgument("n_steps must be positive");
    std::vector<double> times(n_steps + 1);
    for (int k = 0; k <= n_steps; ++k) times[k] = k == n_steps ? t : t * k / n_steps;
    return track_branch_times(sys, pt, times);
}

inline BranchTrack track_branch(SystemId sys, PhasePoint pt, double t) {
    return track_branch(sys, pt, t, default_track_steps(sys, pt, t));
}

/// Times where sqrt(lambda) changes branch, i.e. arg lambda crosses an odd multiple of pi
/// (Re sqrt(lambda) hits zero). Located by linear interpolation of the unwrapped phase.
inline std::vector<double> branch_change_times(const BranchTrack& tr) {
    std::vector<double> out;
    for (size_t k = 1; k < tr.t_samples.size(); ++k) {
        const double a = tr.lambda_args[k - 1], b = tr.lambda_args[k];
        const double lo = std::min(a, b), hi = std::max(a, b);
        // odd multiples (2m+1) pi inside (lo, hi]
        for (int m = static_cast<int>(std::ceil((lo / pi - 1) / 2)); (2 * m + 1) * pi <= hi; ++m) {
            const double level = (2 * m + 1) * pi;
            if (level <= lo) continue;
            const double s = (level - a) / (b - a);
            out.push_back(tr.t_samples[k - 1] + s * (tr.t_samples[k] - tr.t_samples[k - 1]));
        }
    }
    return out;
}

/// Branch-change times refined by bisection on the continuous phase inside each sample step.
inline std::vector<double> branch_change_times(SystemId sys, PhasePoint pt, const BranchTrack& tr) {
    std::vector<double> coarse = branch_change_times(tr);
    std::vector<double> out;
    size_t k = 1;
    for (double tc : coarse) {
        while (k + 1 < tr.t_samples.size() && tr.t_samples[k] < tc) ++k;
        double lo = tr.t_samples[k - 1], hi = tr.t_samples[k];
        const double a = tr.lambda_args[k - 1];
        const double raw_a = std::arg(detail::lambda_of(sys, pt, lo));
        auto phase = [&](double tau) { return a + detail::wrapped(std::arg(detail::lambda_of(sys, pt, tau)) - raw_a); };
        const double level = (2 * std::round((phase(tc) / pi - 1) / 2) + 1) * pi;
        const bool rising = tr.lambda_args[k] > a;
        for (int it = 0; it < 100 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
            const double mid = 0.5 * (lo + hi);
            if ((phase(mid) < level) == rising)
                lo = mid;
            else
                hi = mid;
        }
        out.push_back(0.5 * (lo + hi));
    }
    return out;
}

/// Number of caustics strictly between each pair of consecutive branch changes up to time t.
inline std::vector<int> caustics_between_branch_changes(SystemId sys, PhasePoint pt, double t, int n_steps) {
    const auto zeros = caustic_times(sys, pt, t, n_steps);
    const auto changes = branch_change_times(sys, pt, track_branch(sys, pt, t, n_steps));
    std::vector<int> counts;
    for (size_t k = 1; k < changes.size(); ++k) {
        int c = 0;
        for (double z : zeros)
            if (z > changes[k - 1] && z < changes[k]) ++c;
        counts.push_back(c);
    }
    return counts;
}

}  // namespace scprop
