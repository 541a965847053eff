#include <benchmark/benchmark.h>

#include <aligner/contrastive.hpp>

#include "bench_common.hpp"

using namespace aligner;

static void GlobalLoss(benchmark::State& state) {
    const auto n = state.range(0);
    const Eigen::MatrixXd s = Eigen::MatrixXd::Random(n, n);
    for (auto _ : state) {
        auto r = global_inbatch_loss(s, 5.0);
        benchmark::DoNotOptimize(r.loss);
    }
}
BENCHMARK(GlobalLoss)->RangeMultiplier(2)->Range(16, 256)->Unit(benchmark::kMicrosecond);

// One forward/backward batch through projection, BERT-score, normalization and loss.
static void BatchGradient(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto src = bench::sentences(n, 32, 10, 5);
    const auto tgt = bench::sentences(n, 32, 10, 6);
    const auto params = ScorerParams::identity(32, 32);
    TrainerConfig cfg;
    cfg.batch_size = n;
    cfg.norm.tile_size = n;
    for (auto _ : state) {
        auto r = batch_loss_and_gradient(src, tgt, params, cfg);
        benchmark::DoNotOptimize(r.weight_grad.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BatchGradient)->RangeMultiplier(2)->Range(8, 64)->Unit(benchmark::kMillisecond);
