#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "oodkit/gaussian.hpp"
#include "oodkit/lof.hpp"

namespace {

oodkit::EmbeddingMatrix random_matrix(std::size_t n, std::size_t d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    std::vector<double> v(n * d);
    for (auto& x : v) x = g(rng);
    return oodkit::EmbeddingMatrix(n, d, std::move(v));
}

void BM_LofFit(benchmark::State& state) {
    auto train = random_matrix(state.range(0), state.range(1), 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(oodkit::fit_lof(train, 10, oodkit::Metric::cosine, 1));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LofFit)->Args({1000, 64})->Args({2000, 128})->Args({4000, 512})->Unit(benchmark::kMillisecond);

void BM_LofScoreBatch(benchmark::State& state) {
    auto train = random_matrix(state.range(0), 128, 2);
    auto queries = random_matrix(500, 128, 3);
    auto model = oodkit::fit_lof(train, 50, oodkit::Metric::cosine);
    for (auto _ : state) {
        benchmark::DoNotOptimize(oodkit::lof_score_batch(queries, model, state.range(1)));
    }
    state.SetItemsProcessed(state.iterations() * 500);
}
BENCHMARK(BM_LofScoreBatch)->Args({2000, 1})->Args({2000, 4})->Args({8000, 1})->Unit(benchmark::kMillisecond);

void BM_MahalanobisBatch(benchmark::State& state) {
    const std::size_t d = state.range(0);
    auto stats = oodkit::fit_gaussian(random_matrix(4 * d, d, 4));
    auto queries = random_matrix(1000, d, 5);
    for (auto _ : state) {
        benchmark::DoNotOptimize(oodkit::mahalanobis_score_batch(queries, stats, 1));
    }
    state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_MahalanobisBatch)->Arg(16)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);

}  // namespace
