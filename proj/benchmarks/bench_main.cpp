#include <benchmark/benchmark.h>

#include "embounds/bounds.hpp"
#include "embounds/discrete_opt.hpp"
#include "embounds/flip_evaluator.hpp"
#include "embounds/lift.hpp"
#include "embounds/rng.hpp"
#include "embounds/scenario_gen.hpp"
#include "embounds/sdp.hpp"

using namespace embounds;

namespace {

ScenarioModel make_model(int n_s) {
    ScenarioSpec sp;
    sp.n_t = sp.n_r = 2;
    sp.n_s = n_s;
    sp.coupling_strength = 0.5;
    sp.loss_factor = 0.95;
    sp.seed = 7;
    return generate(sp);
}

LoadVector all_alpha(const ScenarioModel& m) {
    return encode(ControlVector::zeros(m.n_s), m);
}

}  // namespace

static void BM_TransferFull(benchmark::State& state) {
    const ScenarioModel m = make_model(static_cast<int>(state.range(0)));
    const LoadVector r = all_alpha(m);
    for (auto _ : state)
        benchmark::DoNotOptimize(transfer(m, r).h.squaredNorm());
}
BENCHMARK(BM_TransferFull)->Arg(8)->Arg(16)->Arg(32)->Arg(64);

static void BM_FlipProbe(benchmark::State& state) {
    const ScenarioModel m = make_model(static_cast<int>(state.range(0)));
    FlipEvaluator ev(m, all_alpha(m));
    int i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(ev.flipped_h(i).squaredNorm());
        i = (i + 1) % m.n_s;
    }
}
BENCHMARK(BM_FlipProbe)->Arg(8)->Arg(16)->Arg(32)->Arg(64);

static void BM_FlipCommit(benchmark::State& state) {
    const ScenarioModel m = make_model(static_cast<int>(state.range(0)));
    FlipEvaluator ev(m, all_alpha(m));
    int i = 0;
    for (auto _ : state) {
        ev.commit(i);
        benchmark::DoNotOptimize(ev.h());
        i = (i + 1) % m.n_s;
    }
}
BENCHMARK(BM_FlipCommit)->Arg(8)->Arg(16)->Arg(32)->Arg(64);

static void BM_ExhaustiveSearch(benchmark::State& state) {
    const ScenarioModel m = make_model(static_cast<int>(state.range(0)));
    const Objective obj = frobenius_objective();
    for (auto _ : state)
        benchmark::DoNotOptimize(exhaustive_search(m, obj).value);
}
BENCHMARK(BM_ExhaustiveSearch)->Arg(8)->Arg(12)->Arg(16)
    ->Unit(benchmark::kMillisecond);

static void BM_FrobeniusBound(benchmark::State& state) {
    const ScenarioModel m = make_model(static_cast<int>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(frob_sdr_bound(m).value);
}
BENCHMARK(BM_FrobeniusBound)->Arg(4)->Arg(8)->Arg(12)
    ->Unit(benchmark::kMillisecond);

static void BM_FidelityBound(benchmark::State& state) {
    const ScenarioModel m = make_model(static_cast<int>(state.range(0)));
    const TransferMatrix h_des = target_operator(TargetKind::dft, 2);
    for (auto _ : state)
        benchmark::DoNotOptimize(fid_sdr_bound(m, h_des).value);
}
BENCHMARK(BM_FidelityBound)->Arg(4)->Arg(8)->Arg(12)
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
