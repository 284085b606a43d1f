#include <benchmark/benchmark.h>

#include "dwlab/cutoff.hpp"
#include "dwlab/damping.hpp"
#include "dwlab/wave_solver.hpp"

namespace {

void BM_PhiEval(benchmark::State& state) {
    dwlab::DampingCalculus calc(dwlab::DampingSpec::power_law(0.5));
    double t = 0.1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(calc.eval_Phi(t).phi);
        t = t < 100.0 ? t * 1.01 : 0.1;
    }
}
BENCHMARK(BM_PhiEval);

void BM_InvertB(benchmark::State& state) {
    dwlab::DampingCalculus calc(dwlab::DampingSpec::log_tower(2));
    double s = 1.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(calc.invert_B(s));
        s = s < 5.0 ? s * 1.1 : 1.0;
    }
}
BENCHMARK(BM_InvertB);

void BM_WaveStep(benchmark::State& state) {
    dwlab::DampingCalculus calc(dwlab::DampingSpec::constant(1.0));
    dwlab::WaveState st;
    st.N = 1;
    st.h = 0.05;
    const size_t M = 801;
    st.u.resize(M);
    st.v.assign(M, 0.0);
    for (size_t i = 0; i < M; ++i) {
        const double r = i * st.h;
        st.u[i] = std::exp(-r * r);
    }
    const double dt = 0.45 * st.h;
    for (auto _ : state) {
        st = dwlab::step(st, calc, 2.0, dt);
        if (st.t > 1.0) {
            st.t = 0.0;
            st.u_prev.clear();
        }
    }
}
BENCHMARK(BM_WaveStep);

}  // namespace

BENCHMARK_MAIN();
