// Autocorrelation of the coherent state at (5, 0): Fock sum against Herman-Kluk
// on a coarse phase grid, followed by the revival check.
#include <cstdio>
#include <vector>

#include <scprop/scprop.hpp>

int main() {
    using namespace scprop;
    const PhasePoint center{5.0, 0.0};
    std::vector<double> ts;
    for (int k = 0; k <= 10; ++k) ts.push_back(0.01 * k);

    AutocorrConfig cfg;
    cfg.hk_grid = GridSpec::square(121, 3 * pi);
    const TimeSeries q = autocorrelation(Method::Quantum, center, ts);
    const TimeSeries hk = autocorrelation(Method::HK, center, ts, cfg);

    std::printf("%8s %12s %12s\n", "t", "|C| quantum", "|C| H-K");
    for (size_t k = 0; k < ts.size(); ++k)
        std::printf("%8.3f %12.6f %12.6f\n", ts[k], std::abs(q.values[k]), std::abs(hk.values[k]));

    const cplx rev = quantum_autocorrelation(coherent_state_fock(center), pi / 4);
    std::printf("C(pi/4) = %.12f %+.12fi\n", rev.real(), rev.imag());
    return 0;
}
