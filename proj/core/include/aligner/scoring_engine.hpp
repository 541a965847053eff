#pragma once

#include <functional>
#include <span>

#include <Eigen/Core>

#include "aligner/embedding_store.hpp"
#include "aligner/normalization.hpp"
#include "aligner/scorer_params.hpp"
#include "aligner/similarity.hpp"

namespace aligner {

struct ScoringOptions {
    ScoreMode mode = ScoreMode::EvalCosine;
    Pooling pooling = Pooling::BertScore;
    const ScorerParams* params = nullptr;
    NormalizationConfig norm;
    // Source rows scored per band under Pool scope; 0 scores the whole pool
    // at once. Under Tile scope bands follow the tile rows.
    std::size_t band_size = 0;
    std::size_t jobs = 1;
};

using BandSink = std::function<void(Eigen::Index row0, const Eigen::MatrixXd& rows)>;

/// Streams normalized scores of src x tgt as row bands, in row order.
///
/// Pool scope with a band smaller than the pool runs two passes: the first
/// accumulates row, column and grand means band by band, the second rescores
/// each band and applies the affine map. Memory is bounded by
/// band_size x |tgt|.
void for_each_normalized_band(std::span<const SentenceEmbedding> src,
                              std::span<const SentenceEmbedding> tgt, const ScoringOptions& options,
                              const BandSink& sink);

Eigen::MatrixXd normalized_scores(std::span<const SentenceEmbedding> src,
                                  std::span<const SentenceEmbedding> tgt,
                                  const ScoringOptions& options);

} // namespace aligner
