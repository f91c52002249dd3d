#pragma once

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "caustics.hpp"
#include "errors.hpp"
#include "grid.hpp"
#include "io.hpp"
#include "kerr_system.hpp"
#include "linear_metaplectic.hpp"
#include "parallel.hpp"
#include "phase_complex.hpp"
#include "quantum_reference.hpp"
#include "root_search.hpp"
#include "semiclassical.hpp"

namespace scprop {

enum class CliMethod { VVG, IVR, HK, Quantum, Projected };

struct RunConfig {
    SystemId system = SystemId::Kerr;
    CliMethod method = CliMethod::HK;
    double t = pi / 8;
    double t_max = pi / 8;
    int n_t = 300;
    int grid = 201;            // position axis points
    int phase_grid = 201;      // points per phase-space axis (H-K, IVR)
    double window = 3 * pi;    // half width, both axes
    PhasePoint center{5.0, 0.0};
    double eps = 0.0;          // 0: position grid spacing
    double delta = 0.0;        // 0: twice the momentum scan spacing
    int p_samples = 201;
    double eps_c = default_eps_c;
    int n_max = -1;            // -1: window_n_max
    std::string output;
    int threads = 0;

    void validate() const {
        if (grid < 2 || phase_grid < 2 || p_samples < 2) throw InvalidArgument("grids need at least 2 points");
        if (!(window > 0)) throw InvalidArgument("window half width must be positive");
        if (t < 0 || t_max < 0) throw InvalidArgument("times must be non-negative");
        if (n_t < 1) throw InvalidArgument("need at least one time sample");
        if (n_max < -1) throw InvalidArgument("n-max must be -1 or a cutoff >= 0");
        if (eps < 0 || delta < 0 || !(eps_c > 0)) throw InvalidArgument("eps, delta must be >= 0 and eps_c > 0");
        if (system == SystemId::SHO && (method == CliMethod::Quantum || method == CliMethod::Projected))
            throw InvalidArgument("the Fock reference is Kerr only");
    }

    UniformAxis x_axis() const { return UniformAxis::symmetric(window, grid); }
    GridSpec phase() const { return GridSpec::square(phase_grid, window); }
    RootSearchParams roots() const {
        auto r = RootSearchParams::for_grid(x_axis(), -window, window, p_samples);
        if (eps > 0) r.eps = eps;
        if (delta > 0) r.delta = delta;
        return r;
    }
    int fock_cutoff() const { return n_max >= 0 ? n_max : window_n_max(phase()); }
    FockExpansion initial_state() const { return n_max >= 0 ? coherent_state_fock(center, n_max) : coherent_state_fock(center); }
    std::vector<double> times() const {
        std::vector<double> ts(n_t);
        for (int k = 0; k < n_t; ++k) ts[k] = n_t == 1 ? t_max : t_max * k / (n_t - 1);
        return ts;
    }
};

namespace cli_detail {

inline PhasePoint parse_point(const std::string& s) {
    const auto parts = io::split(s, ',');
    if (parts.size() != 2) throw CLI::ValidationError("center", "expected q,p");
    try {
        return {io::parse_double(parts[0]), io::parse_double(parts[1])};
    } catch (const ParseError&) {
        throw CLI::ValidationError("center", "expected q,p");
    }
}

inline std::string with_default(const std::string& out, const std::string& fallback) { return out.empty() ? fallback : out; }

inline void write_grid(const std::string& path, const ComplexField2D& f, double t) {
    io::write_file(path, io::emit(io::GridFile{f, t}));
    io::write_file(path + ".gp", io::emit_plot_script({path}, io::PlotStyle::Heatmap));
    std::cout << "wrote " << path << "\n";
}

inline void write_series(const std::string& path, const TimeSeries& ts) {
    io::write_file(path, io::emit(ts));
    io::write_file(path + ".gp", io::emit_plot_script({path}, io::PlotStyle::Line));
    std::cout << "wrote " << path << "\n";
}

inline bool report(std::ostream& os, const std::string& name, bool ok, const std::string& detail) {
    os << (ok ? "PASS " : "FAIL ") << name << "  " << detail << "\n";
    return ok;
}

/// Quick versions of the invariant suites; the acceptance binary runs the full sizes.
inline int run_verify(std::ostream& os) {
    std::mt19937_64 rng(20240607);
    std::uniform_real_distribution<double> uq(-3 * pi, 3 * pi), ut(1e-3, 1.0);
    bool all = true;
    {
        double worst = 0.0;
        bool ge1 = true;
        for (int k = 0; k < 2000; ++k) {
            const auto cm = complexify_monodromy(flow(SystemId::Kerr, {uq(rng), uq(rng)}, ut(rng)).monodromy);
            worst = std::max(worst, std::abs(block_invariant(cm) - 1.0));
            ge1 = ge1 && std::abs(cm.lambda) >= 1.0 - 1e-9;
        }
        std::ostringstream d;
        d << "max ||L|^2-|G|^2-1| = " << worst;
        all &= report(os, "block-invariant", worst <= 1e-9 && ge1, d.str());
    }
    {
        std::uniform_real_distribution<double> u(-3.0, 3.0), uts(0.05, 0.3);
        int bad = 0, n = 20;
        for (int k = 0; k < n; ++k) {
            const PhasePoint pt{u(rng), u(rng)};
            for (int c : caustics_between_branch_changes(SystemId::Kerr, pt, uts(rng), 4000))
                if (c != 2) {
                    ++bad;
                    break;
                }
        }
        all &= report(os, "kay-rule", bad == 0, std::to_string(bad) + "/" + std::to_string(n) + " trajectories violate");
    }
    {
        const cplx c = quantum_autocorrelation(coherent_state_fock(PhasePoint{5.0, 0.0}), pi / 4);
        const double err = std::abs(c - std::exp(-I * pi / 4.0));
        std::ostringstream d;
        d << "|C(pi/4) - e^{-i pi/4}| = " << err;
        all &= report(os, "revival-phase", err <= 1e-10, d.str());
    }
    {
        RootSearchParams prm;
        prm.p_lo = -3.5;
        prm.p_hi = 3.5;
        prm.p_samples = 2001;
        prm.eps = 1e-3;
        prm.delta = 2 * prm.p_step();
        const auto [lhs, rhs] = verify_delta_composition(SystemId::Kerr, 0.0, 0.5, pi / 4, prm, 1e-3);
        const double rel = std::abs(lhs - rhs) / rhs;
        std::ostringstream d;
        d << "lhs " << lhs << " rhs " << rhs << " rel " << rel;
        all &= report(os, "delta-composition", rel <= 0.02, d.str());
    }
    return all ? 0 : 1;
}

}  // namespace cli_detail

/// Exit codes: 0 success, 1 failed checks or unexpected errors, 2 usage, 3 numerical guard.
inline int run_cli(int argc, char** argv, std::ostream& err = std::cerr) {
    CLI::App app{"Semiclassical propagators for the Kerr oscillator"};
    app.require_subcommand(1);
    RunConfig cfg;
    cfg.threads = thread_hint_from_env();
    std::string system = "kerr", method = "hk", center = "5,0";

    const std::map<std::string, CliMethod> methods{{"vvg", CliMethod::VVG},
                                                   {"ivr", CliMethod::IVR},
                                                   {"hk", CliMethod::HK},
                                                   {"quantum", CliMethod::Quantum},
                                                   {"projected", CliMethod::Projected}};
    auto common = [&](CLI::App* sub) {
        sub->add_option("--system", system, "kerr or sho")->check(CLI::IsMember({"kerr", "sho"}));
        sub->add_option("--threads", cfg.threads, "thread count (0: SCPROP_THREADS or runtime default)");
        sub->add_option("--out", cfg.output, "output file");
    };
    auto grids = [&](CLI::App* sub) {
        sub->add_option("--grid", cfg.grid, "points per position axis");
        sub->add_option("--phase-grid", cfg.phase_grid, "points per phase-space axis");
        sub->add_option("--window", cfg.window, "half width of the window, both axes");
    };
    auto search = [&](CLI::App* sub) {
        sub->add_option("--eps", cfg.eps, "root acceptance radius (0: grid spacing)");
        sub->add_option("--delta", cfg.delta, "momentum clustering radius (0: two scan steps)");
        sub->add_option("--p-samples", cfg.p_samples, "momentum scan points");
    };

    auto* flow_cmd = app.add_subcommand("flow", "classical trajectory data at one time");
    common(flow_cmd);
    flow_cmd->add_option("--center", center, "q,p");
    flow_cmd->add_option("--t", cfg.t, "time");

    auto* prop = app.add_subcommand("propagator", "K(x', x; t) on a position grid");
    common(prop);
    grids(prop);
    search(prop);
    prop->add_option("--method", method, "vvg, hk, quantum or projected")->check(CLI::IsMember({"vvg", "hk", "quantum", "projected"}));
    prop->add_option("--t", cfg.t, "time");
    prop->add_option("--n-max", cfg.n_max, "Fock cutoff for the quantum kernels");

    auto* wf = app.add_subcommand("wavefunction", "propagate a coherent state");
    common(wf);
    grids(wf);
    search(wf);
    wf->add_option("--method", method, "vvg, hk or quantum")->check(CLI::IsMember({"vvg", "hk", "quantum"}));
    wf->add_option("--center", center, "q,p");
    wf->add_option("--t", cfg.t, "time");
    wf->add_option("--n-max", cfg.n_max, "Fock cutoff of the quantum state (-1: sized from the centre)");

    auto* ac = app.add_subcommand("autocorr", "autocorrelation C(t) of a coherent state");
    common(ac);
    grids(ac);
    search(ac);
    ac->add_option("--method", method, "vvg, ivr, hk or quantum")->check(CLI::IsMember({"vvg", "ivr", "hk", "quantum"}));
    ac->add_option("--center", center, "q,p");
    ac->add_option("--tmax", cfg.t_max, "last time sample");
    ac->add_option("--nt", cfg.n_t, "number of time samples from 0 to tmax");
    ac->add_option("--n-max", cfg.n_max, "Fock cutoff of the quantum state (-1: sized from the centre)");

    auto* wig = app.add_subcommand("wigner", "Wigner function of the quantum Kerr-evolved coherent state");
    common(wig);
    grids(wig);
    wig->add_option("--center", center, "q,p");
    wig->add_option("--t", cfg.t, "time");
    wig->add_option("--n-max", cfg.n_max, "Fock cutoff of the quantum state (-1: sized from the centre)");

    auto* twa_cmd = app.add_subcommand("twa", "truncated Wigner approximation of the same state");
    common(twa_cmd);
    grids(twa_cmd);
    twa_cmd->add_option("--center", center, "q,p");
    twa_cmd->add_option("--t", cfg.t, "time");

    auto* ca = app.add_subcommand("caustics", "b = dq'/dp over the phase grid");
    common(ca);
    grids(ca);
    ca->add_option("--t", cfg.t, "time");
    ca->add_option("--eps-c", cfg.eps_c, "caustic level");

    std::vector<double> st_times{0.117, 0.205, 0.606};
    int n_radii = 200;
    auto* st = app.add_subcommand("stickiness", "orbit caustic fraction table");
    common(st);
    st->add_option("--times", st_times, "times")->delimiter(',');
    st->add_option("--radii", n_radii, "radii k*3pi/200, k = 1..n");
    st->add_option("--eps-c", cfg.eps_c, "caustic level");

    auto* ver = app.add_subcommand("verify", "invariant suites, pass/fail table");
    common(ver);

    try {
        app.parse(argc, argv);
        cfg.system = system == "sho" ? SystemId::SHO : SystemId::Kerr;
        cfg.method = methods.at(method);
        cfg.center = cli_detail::parse_point(center);
        cfg.validate();
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e);
            return 0;
        }
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const InvalidArgument& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    }
    set_threads(cfg.threads);

    using cli_detail::with_default;
    try {
        if (*flow_cmd) {
            const FlowResult f = flow(cfg.system, cfg.center, cfg.t);
            const auto cm = complexify_monodromy(f.monodromy);
            std::cout.precision(17);
            std::cout << "q' " << f.point.q << "\np' " << f.point.p << "\na " << f.monodromy.a << "\nb " << f.monodromy.b
                      << "\nc " << f.monodromy.c << "\nd " << f.monodromy.d << "\nS " << f.action_pos << "\nS_W "
                      << f.action_weyl << "\nmu " << caustic_count(cfg.system, cfg.center, cfg.t) << "\nLambda "
                      << cm.lambda.real() << " " << cm.lambda.imag() << "\n";
        } else if (*prop) {
            if (!(cfg.t > 0) && cfg.method == CliMethod::VVG) throw InvalidArgument("vV-G needs t > 0");
            const UniformAxis ax = cfg.x_axis();
            ComplexField2D k;
            switch (cfg.method) {
                case CliMethod::VVG: {
                    VvgStats stats;
                    k = vvg_propagator(cfg.system, ax, ax, cfg.t, cfg.roots(), &stats);
                    std::cout << "roots " << stats.roots << " caustic-excluded " << stats.caustic_excluded << "\n";
                    break;
                }
                case CliMethod::HK: k = hk_propagator(cfg.system, ax, ax, cfg.t, cfg.phase()); break;
                case CliMethod::Quantum: k = exact_propagator(ax, ax, cfg.t, cfg.fock_cutoff()); break;
                default: k = coherent_projected_propagator(ax, ax, cfg.t, cfg.phase(), cfg.fock_cutoff()); break;
            }
            cli_detail::write_grid(with_default(cfg.output, "propagator.grid"), k, cfg.t);
        } else if (*wf) {
            const UniformAxis ax = cfg.x_axis();
            WaveFunction psi;
            if (cfg.method == CliMethod::Quantum)
                psi = wavefunction_from_fock(kerr_evolve(cfg.initial_state(), cfg.t), ax);
            else if (cfg.method == CliMethod::HK)
                psi = hk_propagate(cfg.system, coherent_wavefunction(cfg.center, ax), ax, cfg.t, cfg.phase());
            else {
                if (!(cfg.t > 0)) throw InvalidArgument("vV-G needs t > 0");
                psi = propagate_wavefunction(vvg_propagator(cfg.system, ax, ax, cfg.t, cfg.roots()),
                                             coherent_wavefunction(cfg.center, ax));
            }
            std::cout << "norm " << psi.norm() << "\n";
            // one-row grid: x along the first axis, a single dummy second point
            ComplexField2D f(ax, UniformAxis(0.0, 1.0, 2));
            for (int i = 0; i < ax.n; ++i) f(i, 0) = f(i, 1) = psi.values[i];
            cli_detail::write_grid(with_default(cfg.output, "wavefunction.grid"), f, cfg.t);
        } else if (*ac) {
            AutocorrConfig acfg;
            acfg.system = cfg.system;
            acfg.x_axis = cfg.x_axis();
            acfg.hk_grid = cfg.phase();
            acfg.ivr_grid = cfg.phase();
            acfg.roots = cfg.roots();
            acfg.n_max = cfg.n_max;
            const Method m = cfg.method == CliMethod::VVG   ? Method::VVG
                             : cfg.method == CliMethod::IVR ? Method::IVR
                             : cfg.method == CliMethod::HK  ? Method::HK
                                                            : Method::Quantum;
            cli_detail::write_series(with_default(cfg.output, "autocorr.csv"), autocorrelation(m, cfg.center, cfg.times(), acfg));
        } else if (*wig) {
            const GridSpec g = cfg.phase();
            const UniformAxis ax = cfg.x_axis();
            const WaveFunction psi = wavefunction_from_fock(kerr_evolve(cfg.initial_state(), cfg.t), ax);
            cli_detail::write_grid(with_default(cfg.output, "wigner.grid"), wigner_transform(psi, g.q_axis(), g.p_axis()), cfg.t);
        } else if (*twa_cmd) {
            const GridSpec g = cfg.phase();
            cli_detail::write_grid(with_default(cfg.output, "twa.grid"), twa(cfg.system, cfg.center, cfg.t, g.q_axis(), g.p_axis()),
                                   cfg.t);
        } else if (*ca) {
            const CausticMap m = caustic_map(cfg.t, cfg.phase(), cfg.eps_c);
            std::cout << "caustic pixels " << m.caustic_pixels() << "\n";
            cli_detail::write_grid(with_default(cfg.output, "caustics.grid"), m.field, cfg.t);
        } else if (*st) {
            const auto rows = stickiness_scan(default_radii(n_radii), st_times, cfg.eps_c);
            std::string csv = "radius,t,eps_c,fraction\n";
            for (const auto& r : rows)
                csv += io::format_double(r.radius) + "," + io::format_double(r.t) + "," + io::format_double(r.eps_c) + "," +
                       io::format_double(r.fraction) + "\n";
            const std::string path = with_default(cfg.output, "stickiness.csv");
            io::write_file(path, csv);
            for (double t : st_times) std::cout << "t " << t << " max fraction " << max_fraction_at(rows, t) << "\n";
            std::cout << "wrote " << path << "\n";
        } else if (*ver) {
            return cli_detail::run_verify(std::cout);
        }
    } catch (const InvalidArgument& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        err << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace scprop
