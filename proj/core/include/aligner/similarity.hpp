#pragma once

#include <span>

#include <Eigen/Core>

#include "aligner/embedding_store.hpp"
#include "aligner/scorer_params.hpp"

namespace aligner {

// Training scores raw dot products; evaluation length-normalizes token
// vectors first.
enum class ScoreMode { TrainDot, EvalCosine };

// How a sentence pair is reduced to one number.
enum class Pooling { AvgPoolCosine, BertScore };

const char* to_string(ScoreMode mode);
const char* to_string(Pooling pooling);
ScoreMode parse_score_mode(std::string_view text);
Pooling parse_pooling(std::string_view text);

struct BertScoreBreakdown {
    double precision = 0.0; // mean over b's tokens of the best match in a
    double recall = 0.0;    // mean over a's tokens of the best match in b
    double f = 0.0;         // 2PR/(P+R), 0 when P+R == 0
    std::size_t zero_norm_tokens = 0;
};

/// Token-level BERT-score between two sentences.
///
/// Reference implementation: enumerates every token pair. It is the oracle
/// for the batched `score_tile` path. Zero-norm tokens in EvalCosine mode
/// score as zero vectors and are counted in the breakdown.
BertScoreBreakdown bert_score(const SentenceEmbedding& a, const SentenceEmbedding& b,
                              ScoreMode mode);
BertScoreBreakdown bert_score(const Eigen::Ref<const Eigen::MatrixXd>& a,
                              const Eigen::Ref<const Eigen::MatrixXd>& b, ScoreMode mode);

// M x N matrix of BERT-score F between every (src, tgt) pair, after the
// optional projection. Computed with one GEMM per block of sentences.
// Deterministic for any job count.
Eigen::MatrixXd score_tile(std::span<const SentenceEmbedding> src,
                           std::span<const SentenceEmbedding> tgt, ScoreMode mode,
                           const ScorerParams* params = nullptr, std::size_t jobs = 1);

// Cosine between the token-mean vectors (the mean-pooling baseline). A zero
// pooled vector scores 0.
double avg_pool_similarity(const SentenceEmbedding& a, const SentenceEmbedding& b);

Eigen::MatrixXd avg_pool_tile(std::span<const SentenceEmbedding> src,
                              std::span<const SentenceEmbedding> tgt,
                              const ScorerParams* params = nullptr);

// Dispatches on pooling. AvgPoolCosine ignores `mode`.
Eigen::MatrixXd score_block(std::span<const SentenceEmbedding> src,
                            std::span<const SentenceEmbedding> tgt, Pooling pooling,
                            ScoreMode mode, const ScorerParams* params, std::size_t jobs);

} // namespace aligner
