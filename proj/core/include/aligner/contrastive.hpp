#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "aligner/alignment.hpp"
#include "aligner/embedding_store.hpp"
#include "aligner/normalization.hpp"
#include "aligner/scorer_params.hpp"
#include "aligner/similarity.hpp"

namespace aligner {

// Which negatives each positive logit competes against.
//   Global: every off-diagonal entry of the batch (N^2 - N).
//   Row:    the off-diagonal entries in its own row (N - 1).
enum class NegativeScope { Global, Row };

const char* to_string(NegativeScope scope);
NegativeScope parse_negative_scope(std::string_view text);

struct LossReport {
    double loss = 0.0;       // mean over positives
    std::size_t positives = 0;
    std::size_t negatives = 0; // negatives paired with each positive
    Eigen::MatrixXd grad;    // dLoss / dS, same shape as the tile
};

/// Cross-entropy of each diagonal logit S_ii / tau against itself plus
/// every off-diagonal logit of the batch. Other positives never appear in a
/// denominator. Throws DataError for a non-square tile and ConfigError for
/// tau <= 0.
LossReport global_inbatch_loss(const Eigen::MatrixXd& normalized, double temperature);
LossReport global_inbatch_loss(const SimilarityTile& tile, double temperature);

// Standard one-dimensional form: positive i only competes with row i.
LossReport onedim_inbatch_loss(const Eigen::MatrixXd& normalized, double temperature);
LossReport onedim_inbatch_loss(const SimilarityTile& tile, double temperature);

LossReport inbatch_loss(const Eigen::MatrixXd& normalized, double temperature, NegativeScope scope);

struct TrainerConfig {
    std::size_t epochs = 3;
    std::size_t batch_size = 64;
    double temperature = 5.0;
    double learning_rate = 3e-6;
    std::uint64_t seed = 0;
    // Tile scope with tile = batch is the only meaningful choice during
    // training; scope and tile_size are ignored here.
    NormalizationConfig norm{0.75, NormScope::Tile, 64, true};
    ScoreMode mode = ScoreMode::TrainDot;
    NegativeScope negatives = NegativeScope::Global;
    std::size_t out_dim = 0; // 0 means in_dim
    std::size_t jobs = 1;

    // Throws ConfigError.
    void validate() const;
};

struct BatchResult {
    LossReport report;
    Eigen::MatrixXd weight_grad; // dLoss / dweight, in_dim x out_dim
};

/// Loss of one gold-aligned batch (src[i] <-> tgt[i]) through the whole
/// chain: projection, BERT-score, normalization, in-batch loss. The max
/// inside BERT-score routes its gradient to the argmax token (ties to the
/// lower index).
BatchResult batch_loss_and_gradient(std::span<const SentenceEmbedding> src,
                                    std::span<const SentenceEmbedding> tgt,
                                    const ScorerParams& params, const TrainerConfig& config);

// Forward only; used by finite-difference checks.
double batch_loss(std::span<const SentenceEmbedding> src, std::span<const SentenceEmbedding> tgt,
                  const ScorerParams& params, const TrainerConfig& config);

struct TrainResult {
    ScorerParams params;
    std::vector<double> epoch_losses; // mean batch loss per epoch
    std::vector<double> batch_losses; // loss of each batch before its update
};

// Plain gradient descent over shuffled full batches; the remainder batch
// of each epoch is dropped. `aligned_tgt[i]` must be the gold target of
// `src[i]`. Deterministic given config.seed.
TrainResult train(std::span<const SentenceEmbedding> src,
                  std::span<const SentenceEmbedding> aligned_tgt, const TrainerConfig& config,
                  std::optional<ScorerParams> init = std::nullopt);

// Convenience: reorders tgt through the gold alignment first.
TrainResult train(const TokenEmbeddingSet& src, const TokenEmbeddingSet& tgt, const Alignment& gold,
                  const TrainerConfig& config, std::optional<ScorerParams> init = std::nullopt);

} // namespace aligner
