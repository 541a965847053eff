#include <benchmark/benchmark.h>

#include <aligner/normalization.hpp>
#include <aligner/scoring_engine.hpp>
#include <aligner/similarity.hpp>

#include "bench_common.hpp"

using namespace aligner;

// n x n tile, 16 tokens, dim 64
static void ScoreTile(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto src = bench::sentences(n, 64, 16, 1);
    const auto tgt = bench::sentences(n, 64, 16, 2);
    for (auto _ : state) {
        auto s = score_tile(src, tgt, ScoreMode::EvalCosine);
        benchmark::DoNotOptimize(s.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n));
}
BENCHMARK(ScoreTile)->RangeMultiplier(2)->Range(16, 256)->Unit(benchmark::kMillisecond);

static void AvgPoolTile(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto src = bench::sentences(n, 64, 16, 1);
    const auto tgt = bench::sentences(n, 64, 16, 2);
    for (auto _ : state) {
        auto s = avg_pool_tile(src, tgt);
        benchmark::DoNotOptimize(s.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n));
}
BENCHMARK(AvgPoolTile)->RangeMultiplier(4)->Range(16, 256)->Unit(benchmark::kMicrosecond);

static void Normalize(benchmark::State& state) {
    const auto n = state.range(0);
    const Eigen::MatrixXd raw = Eigen::MatrixXd::Random(n, n);
    const NormalizationConfig cfg{0.75, NormScope::Pool, 256, true};
    for (auto _ : state) {
        auto t = normalize(raw, cfg);
        benchmark::DoNotOptimize(t.normalized.data());
    }
    state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(Normalize)->RangeMultiplier(4)->Range(64, 4096)->Unit(benchmark::kMicrosecond);

// Whole pipeline with tile-scope normalization and banded scoring.
static void NormalizedScores(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto src = bench::sentences(n, 64, 12, 3);
    const auto tgt = bench::sentences(n, 64, 12, 4);
    ScoringOptions opts;
    opts.norm = {0.75, NormScope::Tile, 128, true};
    opts.jobs = static_cast<std::size_t>(state.range(1));
    for (auto _ : state) {
        auto s = normalized_scores(src, tgt, opts);
        benchmark::DoNotOptimize(s.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n));
}
BENCHMARK(NormalizedScores)->Args({256, 1})->Args({512, 1})->Args({512, 4})->Unit(benchmark::kMillisecond);
