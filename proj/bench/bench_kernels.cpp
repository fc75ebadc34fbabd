// Serial reference against the OpenMP version of each hot loop.

#include "nestlab/kernels.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace nestlab;

namespace {

const UnimodalMap<double>& logistic39() {
    static const auto f = UnimodalMap<double>::logistic(3.9);
    return f;
}

std::vector<double> seeds_in(const Interval<double>& I, std::size_t count) {
    std::vector<double> out;
    for (std::size_t i = 0; i < count; ++i)
        out.push_back(I.lo + I.length() * (static_cast<double>(i) + 0.5) / static_cast<double>(count));
    return out;
}

std::vector<BranchSample> cylinder_samples(std::size_t count) {
    std::mt19937_64 rng(5);
    std::vector<BranchSample> out;
    for (std::size_t i = 0; i < count; ++i) out.push_back(sample_cylinder_branch(logistic39(), rng, 30));
    return out;
}

void BM_holder_serial(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(holder_sup_serial(logistic39(), 1.0, state.range(0)));
}
void BM_holder_parallel(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(holder_sup_parallel(logistic39(), 1.0, state.range(0)));
}

void BM_scan_serial(benchmark::State& state) {
    auto I = construct_nice_interval(logistic39());
    auto seeds = seeds_in(I, state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(scan_returns_serial(logistic39(), I, seeds, 100000));
}
void BM_scan_parallel(benchmark::State& state) {
    auto I = construct_nice_interval(logistic39());
    auto seeds = seeds_in(I, state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(scan_returns_parallel(logistic39(), I, seeds, 100000));
}

MeasureSettings bench_settings() {
    MeasureSettings ms;
    ms.holder = estimate_holder_constant(logistic39(), 1.0, 200);
    ms.koebe_settings.grid = 500;
    return ms;
}

void BM_measure_serial(benchmark::State& state) {
    auto samples = cylinder_samples(state.range(0));
    auto ms = bench_settings();
    for (auto _ : state) benchmark::DoNotOptimize(measure_branches_serial(logistic39(), logistic39(), samples, ms));
}
void BM_measure_parallel(benchmark::State& state) {
    auto samples = cylinder_samples(state.range(0));
    auto ms = bench_settings();
    for (auto _ : state) benchmark::DoNotOptimize(measure_branches_parallel(logistic39(), logistic39(), samples, ms));
}

}  // namespace

BENCHMARK(BM_holder_serial)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_holder_parallel)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_scan_serial)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_scan_parallel)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_measure_serial)->Arg(500)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_measure_parallel)->Arg(500)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
