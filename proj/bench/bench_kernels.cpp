// Serial reference kernels against their OpenMP counterparts on a synthetic
// corpus. Run with --benchmark_filter to pick a kernel.

#include "rfsad/estimation.hpp"
#include "rfsad/kernels.hpp"
#include "rfsad/scoring.hpp"
#include "rfsad/synthetic.hpp"

#include <benchmark/benchmark.h>

#include <map>

namespace {

using namespace rfsad;

const std::vector<PointPatternSet>& corpus(std::uint32_t dim)
{
    static std::map<std::uint32_t, std::vector<PointPatternSet>> cache;
    auto& sets = cache[dim];
    if (sets.empty()) {
        const SyntheticSampler sampler(SyntheticConfig::isotropic(dim, 200.0, 7));
        for (std::size_t i = 0; i < 128; ++i)
            sets.push_back(synthetic_item(sampler, SyntheticKind::train, i));
    }
    return sets;
}

void BM_ScatterSerial(benchmark::State& state)
{
    const auto& sets = corpus(static_cast<std::uint32_t>(state.range(0)));
    const InMemorySets src(sets);
    const Eigen::VectorXd mu = Eigen::VectorXd::Zero(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(kernels::scatter_serial(src, mu).matrix.data());
}

void BM_ScatterParallel(benchmark::State& state)
{
    const auto& sets = corpus(static_cast<std::uint32_t>(state.range(0)));
    const InMemorySets src(sets);
    const Eigen::VectorXd mu = Eigen::VectorXd::Zero(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(kernels::scatter_parallel(src, mu).matrix.data());
}

void BM_QuarticSerial(benchmark::State& state)
{
    const auto& sets = corpus(static_cast<std::uint32_t>(state.range(0)));
    const InMemorySets src(sets);
    const Eigen::VectorXd mu = Eigen::VectorXd::Zero(state.range(0));
    const Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(state.range(0), state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(kernels::quartic_sum_serial(src, mu, sigma).sum);
}

void BM_QuarticParallel(benchmark::State& state)
{
    const auto& sets = corpus(static_cast<std::uint32_t>(state.range(0)));
    const InMemorySets src(sets);
    const Eigen::VectorXd mu = Eigen::VectorXd::Zero(state.range(0));
    const Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(state.range(0), state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(kernels::quartic_sum_parallel(src, mu, sigma).sum);
}

void BM_ScoreBatchSerial(benchmark::State& state)
{
    const auto& sets = corpus(static_cast<std::uint32_t>(state.range(0)));
    const InMemorySets src(sets);
    const auto model = fit_model(src);
    for (auto _ : state)
        benchmark::DoNotOptimize(score_batch_serial(src, model, {}).data());
}

void BM_ScoreBatchParallel(benchmark::State& state)
{
    const auto& sets = corpus(static_cast<std::uint32_t>(state.range(0)));
    const InMemorySets src(sets);
    const auto model = fit_model(src);
    for (auto _ : state)
        benchmark::DoNotOptimize(score_batch(src, model, {}).data());
}

} // namespace

BENCHMARK(BM_ScatterSerial)->Arg(16)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ScatterParallel)->Arg(16)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_QuarticSerial)->Arg(16)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_QuarticParallel)->Arg(16)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ScoreBatchSerial)->Arg(16)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ScoreBatchParallel)->Arg(16)->Arg(128)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
