// Serial reference path against the OpenMP path for each parallel kernel.
// Arg 0 runs Exec::serial, arg 1 Exec::parallel.

#include "equivcheck/bayes_fit.hpp"
#include "equivcheck/equiv_stats.hpp"
#include "equivcheck/freq_ks.hpp"
#include "equivcheck/metrics.hpp"
#include "equivcheck/rng.hpp"
#include "equivcheck/synthetic.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <map>

namespace {

using namespace equivcheck;

Exec exec_of(const benchmark::State& state) { return state.range(0) == 0 ? Exec::serial : Exec::parallel; }

const ScenarioSet& scenarios() {
    static const ScenarioSet set = [] {
        SyntheticConfig cfg;
        cfg.scenarios = 500;
        cfg.seed = 1;
        return generate_synthetic(cfg);
    }();
    return set;
}

const WeightedSample& gamma_sample() {
    static const WeightedSample data = [] {
        Rng r(2);
        WeightedSample d;
        for (int i = 0; i < 5000; ++i) {
            d.values.push_back(r.gamma(2.0) / 1.5);
            d.weights.push_back(std::exp(0.5 * r.normal()));
        }
        return d;
    }();
    return data;
}

const PosteriorFit& gamma_fit(std::uint64_t seed) {
    static std::map<std::uint64_t, PosteriorFit> cache;
    auto it = cache.find(seed);
    if (it == cache.end()) {
        ModelSpec spec;
        spec.family = Family::gamma;
        SamplerConfig sc;
        sc.chains = 4;
        sc.draws_per_chain = 500;
        sc.warmup = 500;
        sc.seed = seed;
        it = cache.emplace(seed, fit(gamma_sample(), spec, PriorSpec::defaults(Family::gamma), sc)).first;
    }
    return it->second;
}

void BM_MetricTable(benchmark::State& state) {
    const MetricConfig cfg;
    for (auto _ : state) {
        benchmark::DoNotOptimize(build_metric_table(scenarios(), cfg, exec_of(state)));
    }
}

void BM_FitChains(benchmark::State& state) {
    ModelSpec spec;
    spec.family = Family::log_normal;
    SamplerConfig sc;
    sc.chains = 4;
    sc.draws_per_chain = 1000;
    sc.warmup = 500;
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit(gamma_sample(), spec, PriorSpec::defaults(Family::log_normal), sc, {}, exec_of(state)));
    }
}

void BM_Waic(benchmark::State& state) {
    const PosteriorFit& f = gamma_fit(1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(compute_waic(f, gamma_sample(), exec_of(state)));
    }
}

void BM_KsStatisticDraws(benchmark::State& state) {
    const PosteriorFit& a = gamma_fit(1);
    const PosteriorFit& b = gamma_fit(2);
    StatisticSpec spec;
    spec.kind = StatisticKind::ks_distance;
    for (auto _ : state) {
        benchmark::DoNotOptimize(posterior_statistic(a, b, spec, 3, Pairing::permuted, 0.95, exec_of(state)));
    }
}

void BM_PermutationKs(benchmark::State& state) {
    Rng r(4);
    WeightedSample a;
    WeightedSample b;
    for (int i = 0; i < 2000; ++i) {
        a.values.push_back(r.normal());
        a.weights.push_back(1.0 + r.uniform());
    }
    for (int i = 0; i < 800; ++i) {
        b.values.push_back(r.normal() + 0.05);
        b.weights.push_back(1.0 + r.uniform());
    }
    KsTestOptions opts;
    opts.method = KsMethod::permutation;
    for (auto _ : state) {
        benchmark::DoNotOptimize(two_sample_ks(a, b, opts, exec_of(state)));
    }
}

BENCHMARK(BM_MetricTable)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FitChains)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Waic)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KsStatisticDraws)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PermutationKs)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
