#include <benchmark/benchmark.h>

#include <aligner/mining.hpp>
#include <aligner/retrieval.hpp>
#include <aligner/synthetic.hpp>

using namespace aligner;

static void Retrieval(benchmark::State& state) {
    auto spec = default_synthetic_spec();
    spec.num_pairs = static_cast<std::size_t>(state.range(0));
    const auto data = generate_synthetic_pair(spec);
    const RetrievalTask task{data.src, data.tgt, data.gold, "xx-yy"};
    RetrievalOptions opts;
    for (auto _ : state) {
        auto r = evaluate_retrieval(task, opts);
        benchmark::DoNotOptimize(r.accuracy);
    }
}
BENCHMARK(Retrieval)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);

static void MineAndSweep(benchmark::State& state) {
    auto spec = default_synthetic_spec();
    spec.num_pairs = static_cast<std::size_t>(state.range(0));
    const auto data = generate_synthetic_pair(spec);
    MiningConfig cfg;
    cfg.rule = CandidateRule::MutualBest;
    for (auto _ : state) {
        const auto cands = mine_candidates(data.src.entries(), data.tgt.entries(), cfg);
        const auto labeled = label_candidates(cands, data.src.entries(), data.tgt.entries(), data.gold);
        auto sweep = sweep_threshold(labeled, data.gold.size());
        benchmark::DoNotOptimize(sweep.threshold);
    }
}
BENCHMARK(MineAndSweep)->Arg(512)->Unit(benchmark::kMillisecond);
