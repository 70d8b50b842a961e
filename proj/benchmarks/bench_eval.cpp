#include <benchmark/benchmark.h>

#include <random>

#include "oodkit/contrastive.hpp"
#include "oodkit/eval.hpp"

namespace {

void BM_Auroc(benchmark::State& state) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g;
    oodkit::ScoreSet s;
    s.id_scores.resize(state.range(0));
    s.ood_scores.resize(state.range(0) / 10);
    for (auto& v : s.id_scores) v = g(rng);
    for (auto& v : s.ood_scores) v = g(rng) + 1.0;
    for (auto _ : state) benchmark::DoNotOptimize(oodkit::auroc(s));
}
BENCHMARK(BM_Auroc)->Range(1 << 10, 1 << 18);

void BM_NtXentLossAndGrad(benchmark::State& state) {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g;
    oodkit::Matrix z(2 * state.range(0), 128);
    for (auto& v : z.data) v = g(rng);
    oodkit::ViewBatch batch(z);
    oodkit::Matrix grad;
    for (auto _ : state) benchmark::DoNotOptimize(oodkit::nt_xent_loss_and_grad(batch, &grad));
}
BENCHMARK(BM_NtXentLossAndGrad)->Arg(32)->Arg(128)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
