#include <qreflect/cc_solver.hpp>
#include <qreflect/experiment.hpp>
#include <qreflect/surfaces.hpp>
#include <qreflect/units.hpp>

#include <benchmark/benchmark.h>

using namespace qreflect;

namespace {

const SurfacePotential& glass() {
    static const auto p = SurfacePotential::from_matching(0.5, units::c3_to_internal(3.5e-50), 93.0);
    return p;
}

void BM_Matching(benchmark::State& state) {
    const double c3 = units::c3_to_internal(3.5e-50);
    for (auto _ : state) benchmark::DoNotOptimize(solve_matching(0.5, c3, 93.0));
}
BENCHMARK(BM_Matching)->Unit(benchmark::kMicrosecond);

void BM_FlatSolve(benchmark::State& state) {
    const double kz = 0.01;
    const auto p = CoupledChannelProblem::flat(kz * kz, glass(), AbsorberParams{}, {});
    for (auto _ : state) benchmark::DoNotOptimize(solve(p).p_qr);
}
BENCHMARK(BM_FlatSolve)->Unit(benchmark::kMillisecond);

void BM_CoupledSolve(benchmark::State& state) {
    const int n_max = static_cast<int>(state.range(0));
    const Grating g{1e5, 2e5, n_max};
    const auto cond = ScatteringConditions::from_grazing(BeamSource::from_temperature(50.0).k_i(),
                                                         2e-3, g.d);
    const auto p = CoupledChannelProblem::make(cond, glass(), g, AbsorberParams{}, {});
    for (auto _ : state) benchmark::DoNotOptimize(solve(p).p_qr);
    state.counters["channels"] = static_cast<double>(p.size());
}
BENCHMARK(BM_CoupledSolve)->Arg(2)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
