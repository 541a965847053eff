#pragma once

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "aligner/corpus.hpp"
#include "aligner/synthetic.hpp"
#include "random_data.hpp"

namespace fixtures {

// 500 sources and 500 targets; the first 50 sources have exact
// translations among the targets. The rest come from the same generator
// (same language map) under other content seeds, so they look alike
// statistically but have no partner.
struct Planted {
    aligner::TokenEmbeddingSet src, tgt;
    aligner::Alignment gold;
};

inline Planted planted_pool(std::uint64_t seed = 5, std::size_t planted = 50, std::size_t total = 500) {
    aligner::SyntheticCorpusSpec spec;
    spec.num_pairs = planted;
    spec.noise_sigma = 0.0;
    spec.seed = seed;
    spec.rotation_seed = seed + 1;
    const auto pairs = aligner::generate_synthetic_pair(spec);

    auto extra = spec;
    extra.num_pairs = total - planted;
    extra.seed = seed + 1000;
    extra.id_prefix = "noise-a";
    const auto lonely_src = aligner::generate_synthetic_pair(extra).src;
    extra.seed = seed + 2000;
    extra.id_prefix = "noise-b";
    const auto lonely_tgt = aligner::generate_synthetic_pair(extra).tgt;

    Planted out{aligner::TokenEmbeddingSet(spec.dim, "xx", "planted"),
                aligner::TokenEmbeddingSet(spec.dim, "yy", "planted"), pairs.gold};
    for (const auto& s : pairs.src.entries()) out.src.add(s);
    for (const auto& s : lonely_src.entries()) out.src.add(s);
    // Shuffle real targets among distractors so gold is not a block.
    std::vector<aligner::SentenceEmbedding> targets(lonely_tgt.entries());
    for (const auto& t : pairs.tgt.entries()) targets.push_back(t);
    std::mt19937_64 rng(seed * 7919 + 1);
    std::shuffle(targets.begin(), targets.end(), rng);
    for (auto& t : targets) out.tgt.add(std::move(t));
    return out;
}

// Words are drawn from a small vocabulary so lengths vary and duplicates
// across corpora are possible.
inline std::string random_sentence(std::mt19937_64& rng, std::size_t min_words, std::size_t max_words) {
    static const char* vocab[] = {"alpha", "beta", "gamma", "delta", "eps", "zeta", "eta", "theta",
                                  "iota", "kappa", "lambda", "mu", "nu", "xi", "omicron", "pi"};
    std::uniform_int_distribution<std::size_t> len(min_words, max_words);
    std::string out;
    const std::size_t n = len(rng);
    for (std::size_t i = 0; i < n; ++i) {
        if (i) out += ' ';
        out += vocab[rng() % 16];
    }
    return out;
}

inline aligner::BitextCorpus random_corpus(std::mt19937_64& rng, std::size_t n, const std::string& label,
                                           std::size_t min_words = 1, std::size_t max_words = 12,
                                           bool with_counts = true) {
    aligner::BitextCorpus c;
    for (std::size_t i = 0; i < n; ++i) {
        aligner::BitextPair p;
        p.id = label + "-" + std::to_string(i);
        p.src = random_sentence(rng, min_words, max_words);
        p.tgt = random_sentence(rng, min_words, max_words);
        p.pair_label = label;
        if (with_counts) {
            p.src_tokens = std::uniform_int_distribution<std::size_t>(1, 12)(rng);
            p.tgt_tokens = std::uniform_int_distribution<std::size_t>(1, 12)(rng);
        }
        c.pairs.push_back(std::move(p));
    }
    return c;
}

} // namespace fixtures
