#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aligner/alignment.hpp"
#include "aligner/embedding_store.hpp"

namespace aligner {

/// Parameters of the synthetic two-language generator.
///
/// Token vectors have a shared semantic block (the first `semantic_dim`
/// coordinates) and a language-specific block (the rest). A "language pair"
/// is an orthogonal map fixed by `rotation_seed`: it leaves the semantic
/// block alone and turns the language block by a quarter turn in random
/// planes. Every source token gets a
/// language-block component of scale `language_signal`, so the rotation only
/// matters when that is non-zero.
///
/// Source semantic vectors are N(0, I) plus `hub_bias` along a shared unit
/// direction u. Targets are rotated sources plus N(0, noise_sigma^2) noise.
/// A `popularity_fraction` of targets additionally get `popularity_offset * u`
/// on every token, which makes them score high against every source.
struct SyntheticCorpusSpec {
    std::size_t num_pairs = 256;
    std::size_t dim = 32;
    std::size_t semantic_dim = 16; // 0 means the whole vector is semantic
    std::size_t min_tokens = 4;
    std::size_t max_tokens = 12;
    std::uint64_t seed = 1;          // sentence content
    std::uint64_t rotation_seed = 1; // the language map
    double noise_sigma = 0.05;
    double language_signal = 0.0;
    double hub_bias = 0.0;
    double popularity_fraction = 0.0;
    double popularity_offset = 0.0;
    std::string src_lang = "src";
    std::string tgt_lang = "tgt";
    std::string id_prefix = "s";

    // Throws ConfigError.
    void validate() const;
};

struct SyntheticPair {
    TokenEmbeddingSet src;
    TokenEmbeddingSet tgt;
    Alignment gold;                        // bijection over ids, in source order
    std::vector<std::size_t> popular_targets; // target indices that got the offset
};

// Deterministic in the spec: equal specs give bit-identical output.
SyntheticPair generate_synthetic_pair(const SyntheticCorpusSpec& spec);

// The orthogonal language map for a spec (dim x dim, row-vector convention:
// target = source * map). Exposed for tests.
Eigen::MatrixXd language_map(const SyntheticCorpusSpec& spec);

// Unit hub/popularity direction for a spec, inside the semantic block.
Eigen::VectorXd hub_direction(const SyntheticCorpusSpec& spec);

// Named fixtures shared by tests, benchmarks and the CLI.
SyntheticCorpusSpec default_synthetic_spec();
// Popular targets steal rankings unless scores are normalized.
SyntheticCorpusSpec popularity_fixture_spec();
// Large language-specific component: identity and random projections fail,
// a projection that learns to drop the language block succeeds for any
// rotation seed.
SyntheticCorpusSpec transfer_fixture_spec(std::uint64_t rotation_seed, std::uint64_t seed);

// JSON object with any subset of the spec's fields; missing fields keep
// `base` values. A string value names a fixture: "default", "popularity".
SyntheticCorpusSpec synthetic_spec_from_json(const std::string& text,
                                             const SyntheticCorpusSpec& base = {});
std::string synthetic_spec_to_json(const SyntheticCorpusSpec& spec);

} // namespace aligner
