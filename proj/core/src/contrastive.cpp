#include "aligner/contrastive.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "aligner/error.hpp"
#include "aligner/parallel.hpp"
#include "bertscore_kernel.hpp"

namespace aligner {

const char* to_string(NegativeScope scope) {
    return scope == NegativeScope::Global ? "global" : "row";
}

NegativeScope parse_negative_scope(std::string_view text) {
    if (text == "global") return NegativeScope::Global;
    if (text == "row" || text == "onedim" || text == "one-dimensional") return NegativeScope::Row;
    throw ConfigError("unknown negative scope '" + std::string(text) + "'");
}

namespace {

void check_loss_inputs(const Eigen::MatrixXd& s, double temperature) {
    if (s.rows() != s.cols()) {
        throw DataError("in-batch loss needs a square tile, got " + std::to_string(s.rows()) + "x" +
                        std::to_string(s.cols()));
    }
    if (s.rows() == 0) throw DataError("in-batch loss needs a non-empty tile");
    if (!(temperature > 0.0) || !std::isfinite(temperature)) {
        throw ConfigError("temperature must be positive");
    }
    if (!s.allFinite()) throw DataError("non-finite similarity score");
}

} // namespace

LossReport global_inbatch_loss(const Eigen::MatrixXd& s, double temperature) {
    check_loss_inputs(s, temperature);
    const Eigen::Index n = s.rows();
    const Eigen::MatrixXd z = s / temperature;
    const double shift = z.maxCoeff();
    const Eigen::MatrixXd e = (z.array() - shift).exp().matrix();

    double off = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
            if (i != j) off += e(i, j);

    LossReport report;
    report.positives = static_cast<std::size_t>(n);
    report.negatives = static_cast<std::size_t>(n * n - n);
    report.grad = Eigen::MatrixXd::Zero(n, n);

    const double inv_n = 1.0 / static_cast<double>(n);
    double loss = 0.0;
    double inv_denominators = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double denominator = e(i, i) + off;
        loss += -(z(i, i) - shift) + std::log(denominator);
        inv_denominators += 1.0 / denominator;
        report.grad(i, i) += inv_n * (e(i, i) / denominator - 1.0);
    }
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
            if (i != j) report.grad(i, j) = inv_n * e(i, j) * inv_denominators;

    report.loss = loss * inv_n;
    report.grad /= temperature;
    return report;
}

LossReport onedim_inbatch_loss(const Eigen::MatrixXd& s, double temperature) {
    check_loss_inputs(s, temperature);
    const Eigen::Index n = s.rows();
    const Eigen::MatrixXd z = s / temperature;

    LossReport report;
    report.positives = static_cast<std::size_t>(n);
    report.negatives = static_cast<std::size_t>(n - 1);
    report.grad.resize(n, n);

    const double inv_n = 1.0 / static_cast<double>(n);
    double loss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double shift = z.row(i).maxCoeff();
        const Eigen::RowVectorXd e = (z.row(i).array() - shift).exp().matrix();
        const double denominator = e.sum();
        loss += -(z(i, i) - shift) + std::log(denominator);
        report.grad.row(i) = inv_n * e / denominator;
        report.grad(i, i) -= inv_n;
    }
    report.loss = loss * inv_n;
    report.grad /= temperature;
    return report;
}

LossReport global_inbatch_loss(const SimilarityTile& tile, double temperature) {
    return global_inbatch_loss(tile.normalized, temperature);
}

LossReport onedim_inbatch_loss(const SimilarityTile& tile, double temperature) {
    return onedim_inbatch_loss(tile.normalized, temperature);
}

LossReport inbatch_loss(const Eigen::MatrixXd& normalized, double temperature, NegativeScope scope) {
    return scope == NegativeScope::Global ? global_inbatch_loss(normalized, temperature)
                                          : onedim_inbatch_loss(normalized, temperature);
}

void TrainerConfig::validate() const {
    if (epochs == 0) throw ConfigError("epochs must be positive");
    if (batch_size < 2) throw ConfigError("batch_size must be >= 2");
    if (!(temperature > 0.0)) throw ConfigError("temperature must be positive");
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
    if (!(norm.alpha >= 0.0 && norm.alpha <= 1.0)) throw ConfigError("alpha must be in [0, 1]");
}

namespace {

struct Forward {
    detail::PackedTokens src;
    detail::PackedTokens tgt;
    Eigen::MatrixXd precision;
    Eigen::MatrixXd recall;
    Eigen::MatrixXd f;
    // Per (i, j): winning src row for each tgt token, winning tgt column for
    // each src token. Indexed i * n + j.
    std::vector<std::vector<Eigen::Index>> best_row_for_col;
    std::vector<std::vector<Eigen::Index>> best_col_for_row;
};

Forward forward(std::span<const SentenceEmbedding> src, std::span<const SentenceEmbedding> tgt,
                const ScorerParams& params, const TrainerConfig& config, bool keep_argmax) {
    if (src.size() != tgt.size()) throw DataError("batch sides differ in size");
    if (src.empty()) throw DataError("empty batch");
    if (src.front().dim() != tgt.front().dim()) throw DataError("dimension mismatch");

    Forward fw;
    fw.src = detail::pack(src, &params, config.mode, keep_argmax);
    fw.tgt = detail::pack(tgt, &params, config.mode, keep_argmax);
    const auto n = static_cast<Eigen::Index>(src.size());
    fw.precision.resize(n, n);
    fw.recall.resize(n, n);
    fw.f.resize(n, n);
    if (keep_argmax) {
        fw.best_row_for_col.resize(static_cast<std::size_t>(n * n));
        fw.best_col_for_row.resize(static_cast<std::size_t>(n * n));
    }

    parallel_for(src.size(), config.jobs, [&](std::size_t i) {
        const Eigen::MatrixXd g =
            fw.src.scored.middleRows(fw.src.begin(i), fw.src.length(i)) * fw.tgt.scored.transpose();
        for (std::size_t j = 0; j < tgt.size(); ++j) {
            const auto block = g.middleCols(fw.tgt.begin(j), fw.tgt.length(j));
            const std::size_t slot = i * src.size() + j;
            const auto score = detail::reduce_block(
                block, keep_argmax ? &fw.best_row_for_col[slot] : nullptr,
                keep_argmax ? &fw.best_col_for_row[slot] : nullptr);
            const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
            fw.precision(ii, jj) = score.precision;
            fw.recall(ii, jj) = score.recall;
            fw.f(ii, jj) = score.f;
        }
    });
    return fw;
}

Eigen::MatrixXd normalized_logits(const Eigen::MatrixXd& f, const TrainerConfig& config) {
    NormalizationConfig norm = config.norm;
    norm.scope = NormScope::Pool; // the batch is the tile
    return normalize(f, norm).normalized;
}

// dL/dY for length-normalized rows: (dY - Y (Y . dY)) / |P|.
void cosine_backward(const detail::PackedTokens& packed, Eigen::MatrixXd& grad) {
    for (Eigen::Index r = 0; r < grad.rows(); ++r) {
        const double norm = packed.norms(r);
        if (norm == 0.0) {
            grad.row(r).setZero();
            continue;
        }
        const double along = packed.scored.row(r).dot(grad.row(r));
        grad.row(r) = (grad.row(r) - along * packed.scored.row(r)) / norm;
    }
}

} // namespace

double batch_loss(std::span<const SentenceEmbedding> src, std::span<const SentenceEmbedding> tgt,
                  const ScorerParams& params, const TrainerConfig& config) {
    const auto fw = forward(src, tgt, params, config, false);
    return inbatch_loss(normalized_logits(fw.f, config), config.temperature, config.negatives).loss;
}

BatchResult batch_loss_and_gradient(std::span<const SentenceEmbedding> src,
                                    std::span<const SentenceEmbedding> tgt,
                                    const ScorerParams& params, const TrainerConfig& config) {
    params.validate();
    const auto fw = forward(src, tgt, params, config, true);
    const std::size_t n = src.size();

    BatchResult result;
    result.report = inbatch_loss(normalized_logits(fw.f, config), config.temperature,
                                 config.negatives);
    const Eigen::MatrixXd grad_f = config.norm.enabled
                                       ? normalize_backward(result.report.grad, config.norm.alpha)
                                       : result.report.grad;

    // F = 2PR/(P+R): dF/dP = 2R^2/(P+R)^2, dF/dR = 2P^2/(P+R)^2. F is held
    // at 0 where P+R == 0, so no gradient flows there.
    Eigen::MatrixXd grad_p(grad_f.rows(), grad_f.cols());
    Eigen::MatrixXd grad_r(grad_f.rows(), grad_f.cols());
    for (Eigen::Index j = 0; j < grad_f.cols(); ++j) {
        for (Eigen::Index i = 0; i < grad_f.rows(); ++i) {
            const double p = fw.precision(i, j), r = fw.recall(i, j);
            const double sum = p + r;
            if (sum == 0.0) {
                grad_p(i, j) = grad_r(i, j) = 0.0;
            } else {
                grad_p(i, j) = grad_f(i, j) * 2.0 * r * r / (sum * sum);
                grad_r(i, j) = grad_f(i, j) * 2.0 * p * p / (sum * sum);
            }
        }
    }

    // Route through the argmax entries of every token-similarity block.
    // Source rows and target rows are accumulated in separate passes so
    // each worker owns its output rows.
    const auto& ys = fw.src.scored;
    const auto& yt = fw.tgt.scored;
    Eigen::MatrixXd grad_ys = Eigen::MatrixXd::Zero(ys.rows(), ys.cols());
    Eigen::MatrixXd grad_yt = Eigen::MatrixXd::Zero(yt.rows(), yt.cols());

    parallel_for(n, config.jobs, [&](std::size_t i) {
        const auto ii = static_cast<Eigen::Index>(i);
        const Eigen::Index a0 = fw.src.begin(i), ta = fw.src.length(i);
        for (std::size_t j = 0; j < n; ++j) {
            const auto jj = static_cast<Eigen::Index>(j);
            const Eigen::Index b0 = fw.tgt.begin(j), tb = fw.tgt.length(j);
            const std::size_t slot = i * n + j;
            const double wp = grad_p(ii, jj) / static_cast<double>(tb);
            const double wr = grad_r(ii, jj) / static_cast<double>(ta);
            const auto& rows = fw.best_row_for_col[slot];
            for (Eigen::Index b = 0; b < tb; ++b) grad_ys.row(a0 + rows[b]) += wp * yt.row(b0 + b);
            const auto& cols = fw.best_col_for_row[slot];
            for (Eigen::Index a = 0; a < ta; ++a) grad_ys.row(a0 + a) += wr * yt.row(b0 + cols[a]);
        }
    });
    parallel_for(n, config.jobs, [&](std::size_t j) {
        const auto jj = static_cast<Eigen::Index>(j);
        const Eigen::Index b0 = fw.tgt.begin(j), tb = fw.tgt.length(j);
        for (std::size_t i = 0; i < n; ++i) {
            const auto ii = static_cast<Eigen::Index>(i);
            const Eigen::Index a0 = fw.src.begin(i), ta = fw.src.length(i);
            const std::size_t slot = i * n + j;
            const double wp = grad_p(ii, jj) / static_cast<double>(tb);
            const double wr = grad_r(ii, jj) / static_cast<double>(ta);
            const auto& rows = fw.best_row_for_col[slot];
            for (Eigen::Index b = 0; b < tb; ++b) grad_yt.row(b0 + b) += wp * ys.row(a0 + rows[b]);
            const auto& cols = fw.best_col_for_row[slot];
            for (Eigen::Index a = 0; a < ta; ++a) grad_yt.row(b0 + cols[a]) += wr * ys.row(a0 + a);
        }
    });

    if (config.mode == ScoreMode::EvalCosine) {
        cosine_backward(fw.src, grad_ys);
        cosine_backward(fw.tgt, grad_yt);
    }
    result.weight_grad.noalias() = fw.src.input.transpose() * grad_ys;
    result.weight_grad.noalias() += fw.tgt.input.transpose() * grad_yt;
    return result;
}

TrainResult train(std::span<const SentenceEmbedding> src,
                  std::span<const SentenceEmbedding> aligned_tgt, const TrainerConfig& config,
                  std::optional<ScorerParams> init) {
    config.validate();
    if (src.size() != aligned_tgt.size()) throw DataError("source and target counts differ");
    if (src.size() < config.batch_size) {
        throw DataError("need at least batch_size (" + std::to_string(config.batch_size) +
                        ") pairs, got " + std::to_string(src.size()));
    }
    const std::size_t dim = src.front().dim();
    for (const auto& s : aligned_tgt) {
        if (s.dim() != dim) throw DataError("dimension mismatch between source and target");
    }

    TrainResult result;
    result.params = init ? std::move(*init)
                         : ScorerParams::identity(dim, config.out_dim == 0 ? dim : config.out_dim);
    if (result.params.in_dim() != dim) throw DataError("initial scorer in_dim does not match data");

    std::mt19937_64 rng(config.seed);
    std::vector<std::size_t> order(src.size());
    std::vector<SentenceEmbedding> batch_src, batch_tgt;
    const std::size_t batches = src.size() / config.batch_size;

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        for (std::size_t b = 0; b < batches; ++b) {
            batch_src.clear();
            batch_tgt.clear();
            for (std::size_t k = 0; k < config.batch_size; ++k) {
                const std::size_t idx = order[b * config.batch_size + k];
                batch_src.push_back(src[idx]);
                batch_tgt.push_back(aligned_tgt[idx]);
            }
            const auto step = batch_loss_and_gradient(batch_src, batch_tgt, result.params, config);
            result.batch_losses.push_back(step.report.loss);
            epoch_loss += step.report.loss;
            result.params.weight -= config.learning_rate * step.weight_grad;
        }
        result.epoch_losses.push_back(epoch_loss / static_cast<double>(batches));
    }
    return result;
}

TrainResult train(const TokenEmbeddingSet& src, const TokenEmbeddingSet& tgt, const Alignment& gold,
                  const TrainerConfig& config, std::optional<ScorerParams> init) {
    const auto targets = gold_target_indices(gold, src, tgt);
    std::vector<SentenceEmbedding> aligned;
    aligned.reserve(targets.size());
    for (auto t : targets) aligned.push_back(tgt[t]);
    return train(src.entries(), aligned, config, std::move(init));
}

} // namespace aligner
