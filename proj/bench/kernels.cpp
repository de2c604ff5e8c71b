// Serial reference vs OpenMP kernels on the Italian scenario.
#include <benchmark/benchmark.h>
#include <omp.h>

#include "episens/commands.hpp"

using namespace episens;

namespace {

struct Fixture {
    RunConfig cfg = RunConfig::load(std::string(EPISENS_CONFIG_DIR) + "/italy.cfg");
    ObservedSeries obs = load_observations(cfg);
    TwoRegimeConfig scenario = cfg.scenario(obs, cfg.pre, cfg.post);
    InputDistributionSpec spec = cfg.uq_spec(obs, cfg.post);
};

const Fixture& fixture() {
    static const Fixture f;
    return f;
}

int max_threads() { return omp_get_max_threads(); }

void BM_SampleInputsSerial(benchmark::State& state) {
    const auto& f = fixture();
    for (auto _ : state) benchmark::DoNotOptimize(sample_inputs_serial(f.spec, state.range(0), 1));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_SampleInputsParallel(benchmark::State& state) {
    const auto& f = fixture();
    for (auto _ : state) benchmark::DoNotOptimize(sample_inputs(f.spec, state.range(0), 1, max_threads()));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_EnsembleSerial(benchmark::State& state) {
    const auto& f = fixture();
    const InputSample in = sample_inputs(f.spec, state.range(0), 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(evaluate_ensemble_serial(in, f.scenario, f.scenario.horizon_end));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_EnsembleParallel(benchmark::State& state) {
    const auto& f = fixture();
    const InputSample in = sample_inputs(f.spec, state.range(0), 1);
    EnsembleOptions options;
    options.threads = max_threads();
    for (auto _ : state) {
        benchmark::DoNotOptimize(evaluate_ensemble(in, f.scenario, f.scenario.horizon_end, options));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

BlackBox horizon_box() {
    const auto& f = fixture();
    const TwoRegimeConfig base = f.scenario;
    return [base](std::span<const double> x) { return horizon_output(base, x, {}); };
}

void BM_FactorialSerial(benchmark::State& state) {
    const BlackBox g = horizon_box();
    const PairSampler sampler = spec_pair_sampler(fixture().spec);
    for (auto _ : state) benchmark::DoNotOptimize(replicated_factorial_serial(g, sampler, state.range(0), 1));
    state.SetItemsProcessed(state.iterations() * state.range(0) * 64);
}

void BM_FactorialParallel(benchmark::State& state) {
    const BlackBox g = horizon_box();
    const PairSampler sampler = spec_pair_sampler(fixture().spec);
    for (auto _ : state) {
        benchmark::DoNotOptimize(replicated_factorial(g, sampler, state.range(0), 1, max_threads()));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * 64);
}

void given_data(benchmark::State& state, int threads) {
    const auto& f = fixture();
    const std::size_t n = state.range(0);
    const InputSample in = sample_inputs(f.spec, n, 1);
    const OutputSample out = evaluate_ensemble(in, f.scenario, f.scenario.horizon_end, {});
    const SampleTable table = read_sample_table(write_sample_csv(in, out));
    for (auto _ : state) {
        benchmark::DoNotOptimize(given_data_report(table.factor_names, table.factors, table.output, 50, threads));
    }
    state.SetItemsProcessed(state.iterations() * n);
}

void BM_GivenDataSerial(benchmark::State& state) { given_data(state, 1); }
void BM_GivenDataParallel(benchmark::State& state) { given_data(state, max_threads()); }

}  // namespace

BENCHMARK(BM_SampleInputsSerial)->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SampleInputsParallel)->Arg(100000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_EnsembleSerial)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnsembleParallel)->Arg(1000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_FactorialSerial)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FactorialParallel)->Arg(20)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_GivenDataSerial)->Arg(20000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GivenDataParallel)->Arg(20000)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
