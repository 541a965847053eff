#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aligner/alignment.hpp"
#include "aligner/embedding_store.hpp"
#include "aligner/scoring_engine.hpp"

namespace aligner {

enum class CandidateRule { BestPerSource, MutualBest };

const char* to_string(CandidateRule rule);
CandidateRule parse_candidate_rule(std::string_view text);

struct MiningConfig {
    // nullopt: the caller sweeps a threshold on dev gold.
    std::optional<double> threshold;
    CandidateRule rule = CandidateRule::BestPerSource;
    ScoringOptions scoring{ScoreMode::EvalCosine, Pooling::BertScore, nullptr,
                           NormalizationConfig{0.75, NormScope::Tile, 256, true}, 0, 1};

    void validate() const;
};

struct ScoredPair {
    std::size_t src = 0;
    std::size_t tgt = 0;
    double score = 0.0;

    friend bool operator==(const ScoredPair&, const ScoredPair&) = default;
};

// Candidates under the rule, before thresholding, ordered by source index.
std::vector<ScoredPair> mine_candidates(std::span<const SentenceEmbedding> src,
                                        std::span<const SentenceEmbedding> tgt,
                                        const MiningConfig& config);

// Keeps candidates with score >= threshold.
std::vector<ScoredPair> apply_threshold(std::span<const ScoredPair> candidates, double threshold);

// mine_candidates + apply_threshold. Requires a fixed threshold.
std::vector<ScoredPair> mine(std::span<const SentenceEmbedding> src,
                             std::span<const SentenceEmbedding> tgt, const MiningConfig& config);

Alignment to_alignment(std::span<const ScoredPair> pairs, std::span<const SentenceEmbedding> src,
                       std::span<const SentenceEmbedding> tgt);

struct LabeledCandidate {
    double score = 0.0;
    bool gold = false;
};

struct SweepResult {
    double threshold = 0.0; // may be +/- infinity
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Picks the acceptance threshold (accept score >= t) that maximizes F1
/// against `gold_count` gold pairs, trying every distinct candidate score
/// plus the +inf and -inf sentinels. Ties go to the lower threshold.
/// Throws DataError when `candidates` is empty.
SweepResult sweep_threshold(std::span<const LabeledCandidate> candidates, std::size_t gold_count);

struct MiningReport {
    Alignment predicted;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double chosen_threshold = 0.0;
    CandidateRule rule = CandidateRule::BestPerSource;
};

// precision = |pred & gold| / |pred| (1 when both are empty, 0 when only
// pred is), recall = |pred & gold| / |gold| (1 when gold is empty).
MiningReport f1_against_gold(const Alignment& predicted, const Alignment& gold);

// Labels candidates against gold for sweep_threshold.
std::vector<LabeledCandidate> label_candidates(std::span<const ScoredPair> candidates,
                                               std::span<const SentenceEmbedding> src,
                                               std::span<const SentenceEmbedding> tgt,
                                               const Alignment& gold);

} // namespace aligner
