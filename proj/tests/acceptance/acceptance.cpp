// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failures.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "aligner/ablation.hpp"
#include "aligner/contrastive.hpp"
#include "aligner/corpus.hpp"
#include "aligner/mining.hpp"
#include "aligner/normalization.hpp"
#include "aligner/retrieval.hpp"
#include "aligner/similarity.hpp"
#include "aligner/synthetic.hpp"
#include "cli.hpp"
#include "fixtures.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"
#include "random_data.hpp"

using namespace aligner;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome oracle_equivalence() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(1001);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        const std::size_t dim = 2 + rng() % 15;
        const auto src = testdata::random_sentences(rng, 8, dim, 1, 10, "s");
        const auto tgt = testdata::random_sentences(rng, 8, dim, 1, 10, "t");
        for (auto mode : {ScoreMode::EvalCosine, ScoreMode::TrainDot}) {
            const bool cosine = mode == ScoreMode::EvalCosine;
            const auto tile = score_tile(src, tgt, mode);
            for (int i = 0; i < 8; ++i)
                for (int j = 0; j < 8; ++j) {
                    const double want = oracle::bert_score(oracle::rows_of(src[i].matrix),
                                                           oracle::rows_of(tgt[j].matrix), cosine).f;
                    // Dot products grow with dim; compare relative to magnitude there.
                    const double scale = cosine ? 1.0 : std::max(1.0, std::abs(want));
                    worst = std::max(worst, std::abs(tile(i, j) - want) / scale);
                }
        }
    }
    const double secs = seconds_since(t0);
    return {worst < 1e-5 && secs < 5.0, fmt("max diff %.2e over 100 tiles x 2 modes, %.2fs", worst, secs)};
}

Outcome normalization_algebra() {
    std::mt19937_64 rng(2002);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    double worst_mean = 0, worst_shift = 0, worst_col = 0, worst_suppress = 0;
    const int cases = 1000;
    for (int t = 0; t < cases; ++t) {
        const Eigen::Index m = 1 + rng() % 12, n = 2 + rng() % 12;
        const double alpha = uni(rng);
        const NormalizationConfig cfg{alpha, NormScope::Pool, 256, true};
        const Eigen::MatrixXd f = testdata::random_matrix(rng, m, n, 3.0);
        const Eigen::MatrixXd s = normalize(f, cfg).normalized;
        worst_mean = std::max(worst_mean, std::abs(s.mean()));

        const double c = 10.0 * (uni(rng) - 0.5);
        const Eigen::MatrixXd shifted = normalize((f.array() + c).matrix(), cfg).normalized;
        worst_shift = std::max(worst_shift, (shifted - s).cwiseAbs().maxCoeff());

        const Eigen::Index j = rng() % n;
        const double delta = 5.0 * uni(rng);
        Eigen::MatrixXd g = f;
        g.col(j).array() += delta;
        const Eigen::MatrixXd sg = normalize(g, cfg).normalized;
        const double expect = delta * (1 - alpha) * (1 - 1.0 / double(n));
        worst_col = std::max(worst_col, ((sg.col(j) - s.col(j)).array() - expect).abs().maxCoeff());

        // Purely additive row and column effects vanish at alpha = 1.
        const Eigen::VectorXd a = testdata::random_matrix(rng, m, 1), b = testdata::random_matrix(rng, n, 1);
        Eigen::MatrixXd additive(m, n);
        for (Eigen::Index r = 0; r < m; ++r)
            for (Eigen::Index k = 0; k < n; ++k) additive(r, k) = a(r) + b(k);
        const Eigen::MatrixXd z = normalize(additive, {1.0, NormScope::Pool, 256, true}).normalized;
        worst_suppress = std::max(worst_suppress, z.cwiseAbs().maxCoeff());
    }
    const bool pass = worst_mean < 1e-7 && worst_shift < 1e-9 && worst_col < 1e-9 && worst_suppress < 1e-9;
    return {pass, fmt("%d cases: |mean| %.1e, shift %.1e, column %.1e, alpha=1 residue %.1e", cases, worst_mean,
                      worst_shift, worst_col, worst_suppress)};
}

Outcome loss_fixture() {
    const Eigen::MatrixXd s = Eigen::MatrixXd::Identity(2, 2);
    const auto r = global_inbatch_loss(s, 1.0);
    const double e = std::exp(1.0);
    const double want = -std::log(e / (e + 2.0));
    bool counts = r.negatives == 2;
    for (Eigen::Index n = 1; n <= 9; ++n) {
        std::mt19937_64 rng(n);
        counts = counts && global_inbatch_loss(testdata::random_matrix(rng, n, n), 2.0).negatives ==
                               std::size_t(n * n - n);
    }
    const double gap = std::abs(r.loss - want);
    return {gap < 1e-9 && counts, fmt("loss %.12f vs %.12f (gap %.1e), negatives N^2-N for N=1..9", r.loss, want, gap)};
}

Outcome gradient_check() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(4004);
    double worst = 0;
    int instances = 0, kinked = 0;
    for (auto mode : {ScoreMode::TrainDot, ScoreMode::EvalCosine}) {
        for (auto neg : {NegativeScope::Global, NegativeScope::Row}) {
            for (int t = 0; t < 8;) {
                const auto c = gradcheck::compare(gradcheck::random_instance(rng, mode, neg));
                if (c.crosses_kink) {
                    ++kinked; // an argmax flips inside +-h, no derivative to compare
                    continue;
                }
                worst = std::max(worst, c.relative_error);
                ++instances;
                ++t;
            }
        }
    }
    const double secs = seconds_since(t0);
    return {worst < 1e-4 && secs < 60.0,
            fmt("%d instances (%d redrawn across an argmax switch), max relative error %.2e, %.2fs", instances,
                kinked, worst, secs)};
}

double accuracy_on(const SyntheticPair& data, const ScorerParams* params) {
    RetrievalOptions o;
    o.scoring.params = params;
    return evaluate_retrieval({data.src, data.tgt, data.gold, "aa-bb"}, o).accuracy;
}

Outcome synthetic_transfer() {
    auto train_spec = transfer_fixture_spec(101, 1);
    train_spec.num_pairs = 1024;
    const auto pair_a = generate_synthetic_pair(train_spec);
    const auto pair_b = generate_synthetic_pair(transfer_fixture_spec(202, 2));

    TrainerConfig cfg;
    cfg.temperature = 1.0;
    cfg.learning_rate = 1e-2;
    cfg.epochs = 3;
    const auto trained = train(pair_a.src, pair_a.tgt, pair_a.gold, cfg);
    const auto random = ScorerParams::random(train_spec.dim, train_spec.dim, 5);

    const double acc_trained = accuracy_on(pair_b, &trained.params);
    const double acc_random = accuracy_on(pair_b, &random);
    const double acc_identity = accuracy_on(pair_b, nullptr);
    return {acc_trained >= 0.95 && acc_random <= 0.05,
            fmt("pair B (pool %zu): trained %.3f, random %.3f, identity %.3f", pair_b.src.size(), acc_trained,
                acc_random, acc_identity)};
}

Outcome ablation_direction() {
    AblationGrid grid;
    const auto spec = popularity_fixture_spec();
    grid.tasks.push_back({"popularity", spec});
    grid.seeds = {spec.seed};
    const auto cells = run_grid(grid);
    double bert_norm = -1, avg_raw = -1;
    for (const auto& c : cells) {
        if (c.pooling == Pooling::BertScore && c.normalized) bert_norm = c.result.accuracy;
        if (c.pooling == Pooling::AvgPoolCosine && !c.normalized) avg_raw = c.result.accuracy;
    }
    return {bert_norm >= avg_raw + 0.05,
            fmt("bert-score+norm %.1f vs avg-pool w/o norm %.1f", 100 * bert_norm, 100 * avg_raw)};
}

Outcome mining() {
    std::mt19937_64 rng(7007);
    int agree = 0;
    for (int t = 0; t < 50; ++t) {
        const std::size_t n = 1 + rng() % 300;
        std::vector<LabeledCandidate> c;
        std::vector<oracle::Candidate> o;
        std::size_t golds = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double s = t % 2 ? double(rng() % 50) / 7.0 : testdata::random_matrix(rng, 1, 1)(0, 0);
            const bool g = rng() % 3 == 0;
            golds += g;
            c.push_back({s, g});
            o.push_back({s, g});
        }
        const std::size_t gold_count = golds + rng() % 4;
        agree += std::abs(sweep_threshold(c, gold_count).f1 - oracle::best_f1(o, gold_count)) < 1e-12;
    }

    const auto fx = fixtures::planted_pool();
    MiningConfig cfg;
    const auto cands = mine_candidates(fx.src.entries(), fx.tgt.entries(), cfg);
    const auto sweep = sweep_threshold(label_candidates(cands, fx.src.entries(), fx.tgt.entries(), fx.gold),
                                       fx.gold.size());
    const auto kept = apply_threshold(cands, sweep.threshold);
    const double f1 = f1_against_gold(to_alignment(kept, fx.src.entries(), fx.tgt.entries()), fx.gold).f1;
    return {agree == 50 && f1 == 1.0, fmt("sweep = exhaustive on %d/50; planted F1 %.4f at threshold %.4f", agree, f1,
                                          sweep.threshold)};
}

int cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    return cli::dispatch(args, out, err);
}

bool manifests_reproduce(std::string& note) {
    const fs::path dir = fs::temp_directory_path() / "aligner_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir / "pairs");
    fs::create_directories(dir / "held");
    const auto p = [&](const std::string& s) { return (dir / s).string(); };

    std::mt19937_64 rng(88);
    for (const char* label : {"de-en", "fr-en"}) {
        std::ofstream tsv(dir / "pairs" / (std::string(label) + ".tsv"));
        aligner::write_bitext_tsv(fixtures::random_corpus(rng, 300, label, 1, 9), tsv);
    }
    std::ofstream(dir / "held" / "test.txt") << fixtures::random_sentence(rng, 1, 3) << '\n';
    std::ofstream(dir / "spec.json") << R"({"fixture": "popularity", "num_pairs": 120})";
    std::ofstream(dir / "grid.json") << R"({"tasks": [{"synthetic": {"num_pairs": 60}}], "seeds": [1, 2]})";

    const std::vector<std::vector<std::string>> runs{
        {"prepare-data", "--synthetic", p("spec.json"), "--out", p("syn"), "--seed", "3"},
        {"prepare-data", "--pairs", p("pairs"), "--out", p("bitext"), "--budget", "200", "--token-fallback",
         "whitespace", "--min-tokens", "3", "--decontaminate", p("held"), "--seed", "9"},
        {"train", "--src", p("syn/src.temb"), "--tgt", p("syn/tgt.temb"), "--gold", p("syn/gold.tsv"), "--out",
         p("w.tscr"), "--epochs", "2", "--batch-size", "16", "--learning-rate", "0.01", "--temperature", "1"},
        {"score", "--src", p("syn/src.temb"), "--tgt", p("syn/tgt.temb"), "--params", p("w.tscr"), "--out",
         p("scores.tsv"), "--norm-scope", "tile", "--tile-size", "32"},
        {"retrieve", "--src", p("syn/src.temb"), "--tgt", p("syn/tgt.temb"), "--gold", p("syn/gold.tsv"), "--out",
         p("retrieve.jsonl"), "--bidirectional"},
        {"mine", "--src", p("syn/src.temb"), "--tgt", p("syn/tgt.temb"), "--gold", p("syn/gold.tsv"), "--sweep",
         "--rule", "mutual", "--out", p("mined.tsv")},
        {"ablate", "--grid", p("grid.json"), "--out", p("cells.jsonl")}};
    const std::vector<std::string> manifests{p("syn/manifest.json"),       p("bitext/manifest.json"),
                                             p("w.tscr.manifest.json"),    p("scores.tsv.manifest.json"),
                                             p("retrieve.jsonl.manifest.json"), p("mined.tsv.manifest.json"),
                                             p("cells.jsonl.manifest.json")};
    int reproduced = 0;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        if (cli(runs[i]) != 0) {
            note = "run failed: " + runs[i][0];
            return false;
        }
    }
    for (const auto& m : manifests) reproduced += cli({"rerun", m}) == 0;
    note = fmt("%d/%zu manifests rerun byte-identically", reproduced, manifests.size());
    fs::remove_all(dir);
    return reproduced == int(manifests.size());
}

Outcome pipeline() {
    std::mt19937_64 rng(8008);
    // 10^4 pairs over four language pairs of uneven size.
    std::map<std::string, BitextCorpus> per_pair;
    const std::vector<std::pair<std::string, std::size_t>> sizes{
        {"de-en", 5000}, {"fr-en", 3000}, {"hi-en", 1500}, {"sw-en", 500}};
    for (const auto& [label, n] : sizes) per_pair[label] = fixtures::random_corpus(rng, n, label, 1, 12);

    bool budget_ok = true;
    for (std::uint64_t budget : {1ull, 999ull, 4000ull, 10000ull, 20000ull}) {
        BudgetSpec spec;
        spec.total_budget = budget;
        spec.seed = budget;
        std::vector<std::uint64_t> avail;
        for (const auto& [label, n] : sizes) {
            spec.pair_labels.push_back(label);
            avail.push_back(n);
        }
        const auto sample = sample_budget(per_pair, spec);
        const auto want = oracle::deal_budget(avail, budget);
        std::map<std::string, std::uint64_t> got;
        for (const auto& pr : sample.pairs) ++got[pr.pair_label];
        for (std::size_t i = 0; i < sizes.size(); ++i) budget_ok = budget_ok && got[sizes[i].first] == want[i];
        budget_ok = budget_ok && sample.size() == std::min<std::uint64_t>(budget, 10000);
    }

    BitextCorpus all;
    for (const auto& [label, c] : per_pair) all.pairs.insert(all.pairs.end(), c.pairs.begin(), c.pairs.end());
    all.pairs[0].src_tokens = 4;
    all.pairs[0].tgt_tokens = 12;
    all.pairs[1].src_tokens = 5;
    all.pairs[1].tgt_tokens = 5;
    const auto filtered = filter_min_tokens(all, 5);
    std::size_t want_kept = 0;
    for (const auto& pr : all.pairs) want_kept += *pr.src_tokens >= 5 && *pr.tgt_tokens >= 5;
    const bool boundary_ok = filtered.size() == want_kept && filtered.pairs[0].id == all.pairs[1].id;

    std::vector<std::string> held;
    for (int i = 0; i < 300; ++i) held.push_back(fixtures::random_sentence(rng, 1, 4));
    const auto decon = decontaminate(all, {held});
    std::set<std::string> banned;
    for (const auto& h : held) banned.insert(oracle::squash(h));
    std::size_t brute = 0;
    for (const auto& pr : all.pairs) brute += banned.contains(oracle::squash(pr.src)) || banned.contains(oracle::squash(pr.tgt));
    const bool decon_ok = decon.removed == brute && decon.corpus.size() == all.size() - brute;

    std::string note;
    const bool repro = manifests_reproduce(note);
    return {budget_ok && boundary_ok && decon_ok && repro,
            fmt("budget %s, boundary %s (%zu kept), decontamination %s (%zu removed), %s", budget_ok ? "ok" : "BAD",
                boundary_ok ? "ok" : "BAD", filtered.size(), decon_ok ? "ok" : "BAD", decon.removed, note.c_str())};
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"oracle equivalence", oracle_equivalence},   {"normalization algebra", normalization_algebra},
        {"loss correctness", loss_fixture},           {"gradient check", gradient_check},
        {"synthetic transfer", synthetic_transfer},   {"ablation direction", ablation_direction},
        {"mining", mining},                           {"pipeline", pipeline}};
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        failures += !o.pass;
        std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
        std::fflush(stdout);
    }
    return failures;
}
