#include <benchmark/benchmark.h>

#include "multiroc/experiments.hpp"
#include "multiroc/serial_reference.hpp"

using namespace multiroc;

namespace {

const ScoredDataset& sample_data() {
    static const ScoredDataset data = [] {
        SimulationConfig cfg;
        cfg.n = 5000;
        cfg.k = 5;
        cfg.seed = 7;
        return generate_multinomial(cfg).truth;
    }();
    return data;
}

struct FittedProblem {
    PairwiseRates rates;
    CostWeights costs;
    FactorizationFit fit;
};

const FittedProblem& sample_fit() {
    static const FittedProblem p = [] {
        FittedProblem out;
        out.rates = rate_matrices(sample_data(), 50);
        out.costs = cardinality_weights(out.rates, WeightMode::unweighted);
        out.fit = fit(out.rates, out.costs);
        return out;
    }();
    return p;
}

void BM_RatesSerial(benchmark::State& state) {
    const auto levels = default_levels(50);
    for (auto _ : state) benchmark::DoNotOptimize(serial::rate_matrices(sample_data(), levels));
}

void BM_RatesParallel(benchmark::State& state) {
    const auto levels = default_levels(50);
    for (auto _ : state) benchmark::DoNotOptimize(rate_matrices(sample_data(), levels));
}

void BM_BootstrapSerial(benchmark::State& state) {
    const auto& p = sample_fit();
    BootstrapOptions opts;
    opts.B = 20;
    for (auto _ : state) benchmark::DoNotOptimize(serial::bootstrap(p.rates, p.fit, p.costs, opts));
}

void BM_BootstrapParallel(benchmark::State& state) {
    const auto& p = sample_fit();
    BootstrapOptions opts;
    opts.B = 20;
    for (auto _ : state) benchmark::DoNotOptimize(bootstrap(p.rates, p.fit, p.costs, opts));
}

void BM_PairAucsSerial(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(serial::all_pair_aucs(sample_data()));
}

void BM_PairAucsParallel(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(all_pair_aucs(sample_data()));
}

}  // namespace

BENCHMARK(BM_RatesSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RatesParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BootstrapSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BootstrapParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PairAucsSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PairAucsParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
