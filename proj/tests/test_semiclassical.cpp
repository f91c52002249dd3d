#include <catch_amalgamated.hpp>

#include <random>

#include <scprop/linear_metaplectic.hpp>
#include <scprop/quantum_reference.hpp>
#include <scprop/semiclassical.hpp>

using namespace scprop;
using Catch::Matchers::WithinAbs;

namespace {

// e^{-it/2} <x|q_t, p_t>: harmonic evolution of a coherent state.
WaveFunction sho_evolved(PhasePoint c, double t, const UniformAxis& ax) {
    const PhasePoint ct = flow(SystemId::SHO, c, t).point;
    WaveFunction wf = coherent_wavefunction(ct, ax);
    for (auto& v : wf.values) v *= std::exp(-0.5 * I * t);
    return wf;
}

double max_abs_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    double m = 0.0;
    for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

cplx inner(const WaveFunction& a, const WaveFunction& b) {
    const auto w = trapezoid_weights(a.grid);
    cplx s = 0.0;
    for (int i = 0; i < a.grid.n; ++i) s += w[i] * std::conj(a.values[i]) * b.values[i];
    return s;
}

}  // namespace

TEST_CASE("vV-G is exact for the harmonic oscillator") {
    const UniformAxis ax(-3, 3, 101);
    // p = (x' - x cos t) / sin t reaches 15 at t = pi/8
    const auto prm = RootSearchParams::for_grid(ax, -16, 16, 641);
    for (double t : {pi / 8, pi / 4, 3 * pi / 8}) {
        VvgStats stats;
        const ComplexField2D k = vvg_propagator(SystemId::SHO, ax, ax, t, prm, &stats);
        CHECK(stats.caustic_excluded == 0);
        CHECK(stats.roots == 101L * 101L);
        double dev = 0.0;
        for (int i = 0; i < ax.n; ++i)
            for (int j = 0; j < ax.n; ++j) dev = std::max(dev, std::abs(k(i, j) - mehler_kernel(t, ax.at(i), ax.at(j))));
        CHECK(dev <= 1e-8);
    }
    CHECK_THROWS_AS(vvg_propagator(SystemId::SHO, ax, ax, 0.0, prm), InvalidArgument);
}

TEST_CASE("H-K resolves the identity at t = 0") {
    const UniformAxis ax(-8, 8, 161);
    const GridSpec g = GridSpec::square(201, 3 * pi);
    const WaveFunction phi = coherent_wavefunction({1.0, 0.5}, ax);
    const WaveFunction out = propagate_wavefunction(hk_propagator(SystemId::Kerr, ax, ax, 0.0, g), phi);
    CHECK(max_abs_diff(out.values, phi.values) <= 1e-6);
}

TEST_CASE("H-K is exact for the harmonic oscillator, caustic times included") {
    const UniformAxis ax(-8, 8, 321);
    const GridSpec g = GridSpec::square(161, 8.0);
    const PhasePoint c{1.0, 0.5};
    const WaveFunction phi = coherent_wavefunction(c, ax);
    for (double t : {pi / 8, pi / 4, pi / 2, pi, 4.0}) {
        const WaveFunction out = hk_propagate(SystemId::SHO, phi, ax, t, g);
        REQUIRE(max_abs_diff(out.values, sho_evolved(c, t, ax).values) <= 1e-4);
        for (auto v : out.values) REQUIRE(std::isfinite(std::abs(v)));
    }
    // the kernel route gives the same wave function
    const WaveFunction via_kernel = propagate_wavefunction(hk_propagator(SystemId::SHO, ax, ax, pi, g), phi);
    CHECK(max_abs_diff(via_kernel.values, sho_evolved(c, pi, ax).values) <= 1e-4);
}

TEST_CASE("H-K autocorrelation matches the propagated overlap") {
    const UniformAxis ax(-3 * pi, 3 * pi, 201);
    const GridSpec g = GridSpec::square(121, 3 * pi);
    const WaveFunction psi = coherent_wavefunction({2.0, 0.5}, ax);
    const std::vector<double> ts{0.0, 0.02, 0.05};
    const TimeSeries c = hk_autocorrelation(SystemId::Kerr, psi, ts, g);
    for (size_t k = 0; k < ts.size(); ++k) {
        const cplx direct = inner(psi, hk_propagate(SystemId::Kerr, psi, ax, ts[k], g));
        REQUIRE(std::abs(c.values[k] - direct) <= 1e-10);
    }
}

TEST_CASE("H-K pre-factor growth") {
    // |sqrt(lambda)| = (1 + theta^2)^{1/4}, theta = 4 r^2 t: finite everywhere, below 10 for r <= 7 at t = pi/8
    const double t3 = pi / 8;
    const UniformAxis ax(-3 * pi, 3 * pi, 201);
    double max_inner = 0.0;
    for (int i = 0; i < ax.n; ++i)
        for (int j = 0; j < ax.n; ++j) {
            const PhasePoint pt{ax.at(i), ax.at(j)};
            const double s = std::abs(sqrt_lambda(SystemId::Kerr, pt, t3));
            const double r2 = pt.q * pt.q + pt.p * pt.p;
            REQUIRE(std::isfinite(s));
            REQUIRE(s >= 1.0);
            REQUIRE_THAT(s, WithinAbs(std::pow(1 + 16 * r2 * r2 * t3 * t3, 0.25), 1e-12 * s));
            if (r2 <= 49) max_inner = std::max(max_inner, s);
        }
    CHECK(max_inner < 10);
}

TEST_CASE("position IVR") {
    const UniformAxis ax(-3 * pi, 3 * pi, 401);
    const WaveFunction psi = coherent_wavefunction({5, 0}, ax);

    // at t = 0 the kernel is a delta
    CHECK(std::abs(ivr_matrix_element(SystemId::Kerr, psi, psi, 0.0, GridSpec::square(201, 3 * pi)) - psi.norm_squared()) <= 1e-12);

    // once b (p window) covers the ket, the result is grid converged and close to the quantum value
    const double t = 0.005;
    const cplx c201 = ivr_matrix_element(SystemId::Kerr, psi, psi, t, GridSpec::square(201, 3 * pi));
    const cplx c401 = ivr_matrix_element(SystemId::Kerr, psi, psi, t, GridSpec::square(401, 3 * pi));
    CHECK(std::abs(c201 - c401) <= 1e-3);
    CHECK(std::abs(c401 - quantum_autocorrelation(coherent_state_fock({5, 0}), t)) <= 0.03);

    // the harmonic oscillator is exact in the continuum limit
    const UniformAxis sx(-8, 8, 801);
    const WaveFunction a = coherent_wavefunction({1.0, 0.5}, sx);
    for (double t : {0.5, 1.2}) {
        const cplx exact = inner(a, sho_evolved({1.0, 0.5}, t, sx));
        const cplx ivr = ivr_matrix_element(SystemId::SHO, a, a, t, GridSpec::square(401, 8.0));
        CHECK(std::abs(ivr - exact) <= 1e-3);
    }
}

TEST_CASE("propagating wave functions") {
    const UniformAxis ax(-8, 8, 161);
    const WaveFunction phi = coherent_wavefunction({0.5, 0.5}, ax);
    const WaveFunction out = propagate_wavefunction(exact_propagator(ax, ax, 0.0, 80), phi);
    CHECK(max_abs_diff(out.values, phi.values) <= 1e-6);

    const WaveFunction other = coherent_wavefunction({0.5, 0.5}, UniformAxis(-8, 8, 101));
    CHECK_THROWS_AS(propagate_wavefunction(exact_propagator(ax, ax, 0.0, 10), other), GridMismatch);
}

TEST_CASE("autocorrelation") {
    const PhasePoint c{5, 0};
    const std::vector<double> ts{0.0, pi / 4};
    const TimeSeries q = autocorrelation(Method::Quantum, c, ts);
    CHECK(std::abs(q.values[0] - 1.0) <= 1e-12);
    CHECK(std::abs(q.values[1] - std::exp(-I * pi / 4.0)) <= 1e-10);
    CHECK_THAT(std::arg(q.values[1]), WithinAbs(-pi / 4, 1e-10));

    AutocorrConfig cfg;
    cfg.ivr_grid = GridSpec::square(201, 3 * pi);
    for (Method m : {Method::HK, Method::VVG, Method::IVR}) {
        const TimeSeries s = autocorrelation(m, c, {0.0}, cfg);
        CHECK(std::abs(s.values[0] - 1.0) <= 0.02);
    }
    CHECK_THROWS_AS(autocorrelation(Method::Quantum, c, {0.1, 0.05}), InvalidArgument);
    CHECK_THROWS_AS(autocorrelation(Method::Quantum, c, {-0.1}), InvalidArgument);
}

TEST_CASE("Fock-sum autocorrelation equals the spectral-kernel overlap") {
    const PhasePoint c{5, 0};
    const UniformAxis ax(-12, 12, 481);
    const WaveFunction psi = coherent_wavefunction(c, ax);
    const FockExpansion st = coherent_state_fock(c);
    std::mt19937_64 rng(51);
    std::uniform_real_distribution<double> ut(0, 0.8);
    for (int k = 0; k < 5; ++k) {
        const double t = ut(rng);
        const WaveFunction out = propagate_wavefunction(exact_propagator(ax, ax, t, st.n_max()), psi);
        REQUIRE(std::abs(inner(psi, out) - quantum_autocorrelation(st, t)) <= 1e-5);
    }
}

TEST_CASE("integral form of the root search") {
    RootSearchParams prm;
    prm.p_lo = -3.5;
    prm.p_hi = 3.5;
    prm.p_samples = 2001;
    prm.eps = 1e-3;
    prm.delta = 2 * prm.p_step();

    const auto [l1, r1] = verify_delta_composition(SystemId::Kerr, 0.0, 0.5, pi / 4, prm, 2e-3);
    const auto [l2, r2] = verify_delta_composition(SystemId::Kerr, 0.0, 0.5, pi / 4, prm, 1e-3);
    CHECK(std::abs(l2 - r2) / r2 <= 0.02);
    CHECK(std::abs(l2 - r2) <= std::abs(l1 - r1));
    CHECK(r1 == r2);

    // the flow never reaches x' = 5 from q = 0 at short times inside this window
    const auto [l0, r0] = verify_delta_composition(SystemId::Kerr, 0.0, 5.0, 1e-3, prm, 1e-3);
    CHECK(r0 == 0.0);
    CHECK(l0 < 1e-12);

    CHECK_THROWS_AS(verify_delta_composition(SystemId::Kerr, 0.0, 0.5, pi / 4, prm, 0.0), InvalidArgument);
}
