#include "aligner/similarity.hpp"

#include <string>

#include "log.hpp"

#include "aligner/error.hpp"
#include "aligner/parallel.hpp"
#include "bertscore_kernel.hpp"

namespace aligner {

const char* to_string(ScoreMode mode) {
    return mode == ScoreMode::TrainDot ? "train-dot" : "eval-cosine";
}

const char* to_string(Pooling pooling) {
    return pooling == Pooling::BertScore ? "bert-score" : "avg-pool";
}

ScoreMode parse_score_mode(std::string_view text) {
    if (text == "train-dot" || text == "train" || text == "dot") return ScoreMode::TrainDot;
    if (text == "eval-cosine" || text == "eval" || text == "cosine") return ScoreMode::EvalCosine;
    throw ConfigError("unknown score mode '" + std::string(text) + "'");
}

Pooling parse_pooling(std::string_view text) {
    if (text == "bert-score" || text == "bertscore") return Pooling::BertScore;
    if (text == "avg-pool" || text == "avg-pooling" || text == "mean") return Pooling::AvgPoolCosine;
    throw ConfigError("unknown pooling '" + std::string(text) + "'");
}

namespace detail {

std::size_t normalize_rows(Eigen::MatrixXd& rows, Eigen::VectorXd* norms) {
    std::size_t zero = 0;
    if (norms) norms->resize(rows.rows());
    for (Eigen::Index r = 0; r < rows.rows(); ++r) {
        const double n = rows.row(r).norm();
        if (norms) (*norms)(r) = n;
        if (n > 0.0) {
            rows.row(r) /= n;
        } else {
            ++zero;
        }
    }
    return zero;
}

PackedTokens pack(std::span<const SentenceEmbedding> sentences, const ScorerParams* params,
                  ScoreMode mode, bool keep_input) {
    PackedTokens packed;
    packed.offsets.reserve(sentences.size() + 1);
    packed.offsets.push_back(0);
    Eigen::Index total = 0;
    const Eigen::Index dim = sentences.empty() ? 0 : sentences.front().matrix.cols();
    for (const auto& s : sentences) {
        if (s.matrix.cols() != dim) throw DataError("dimension mismatch inside sentence list");
        total += s.matrix.rows();
        packed.offsets.push_back(total);
    }
    if (params && !sentences.empty() && static_cast<std::size_t>(dim) != params->in_dim()) {
        throw DataError("scorer in_dim " + std::to_string(params->in_dim()) +
                        " does not match embedding dim " + std::to_string(dim));
    }

    Eigen::MatrixXd input(total, dim);
    for (std::size_t s = 0; s < sentences.size(); ++s) {
        input.middleRows(packed.offsets[s], sentences[s].matrix.rows()) =
            sentences[s].matrix.cast<double>();
    }
    if (params) {
        packed.projected.noalias() = input * params->weight;
    } else {
        packed.projected = input;
    }
    if (keep_input) packed.input = std::move(input);

    packed.scored = packed.projected;
    if (mode == ScoreMode::EvalCosine) {
        packed.zero_norm = normalize_rows(packed.scored, &packed.norms);
    }
    return packed;
}

BlockScore reduce_block(const Eigen::Ref<const Eigen::MatrixXd>& g,
                        std::vector<Eigen::Index>* best_row_for_col,
                        std::vector<Eigen::Index>* best_col_for_row) {
    const Eigen::Index rows = g.rows();
    const Eigen::Index cols = g.cols();
    if (best_row_for_col) best_row_for_col->assign(cols, 0);
    if (best_col_for_row) best_col_for_row->assign(rows, 0);

    double precision = 0.0;
    for (Eigen::Index c = 0; c < cols; ++c) {
        Eigen::Index best = 0;
        double value = g(0, c);
        for (Eigen::Index r = 1; r < rows; ++r) {
            if (g(r, c) > value) {
                value = g(r, c);
                best = r;
            }
        }
        precision += value;
        if (best_row_for_col) (*best_row_for_col)[c] = best;
    }
    double recall = 0.0;
    for (Eigen::Index r = 0; r < rows; ++r) {
        Eigen::Index best = 0;
        double value = g(r, 0);
        for (Eigen::Index c = 1; c < cols; ++c) {
            if (g(r, c) > value) {
                value = g(r, c);
                best = c;
            }
        }
        recall += value;
        if (best_col_for_row) (*best_col_for_row)[r] = best;
    }
    BlockScore out;
    out.precision = precision / static_cast<double>(cols);
    out.recall = recall / static_cast<double>(rows);
    out.f = harmonic(out.precision, out.recall);
    return out;
}

std::vector<std::size_t> group_boundaries(const PackedTokens& packed, Eigen::Index token_budget) {
    std::vector<std::size_t> bounds{0};
    const std::size_t n = packed.sentences();
    Eigen::Index used = 0;
    for (std::size_t s = 0; s < n; ++s) {
        const Eigen::Index len = packed.length(s);
        if (used > 0 && used + len > token_budget) {
            bounds.push_back(s);
            used = 0;
        }
        used += len;
    }
    if (bounds.back() != n) bounds.push_back(n);
    return bounds;
}

} // namespace detail

BertScoreBreakdown bert_score(const Eigen::Ref<const Eigen::MatrixXd>& a,
                              const Eigen::Ref<const Eigen::MatrixXd>& b, ScoreMode mode) {
    if (a.cols() != b.cols()) {
        throw DataError("dimension mismatch: " + std::to_string(a.cols()) + " vs " +
                        std::to_string(b.cols()));
    }
    if (a.rows() == 0 || b.rows() == 0) throw DataError("bert_score needs at least one token");

    BertScoreBreakdown out;
    Eigen::MatrixXd an = a;
    Eigen::MatrixXd bn = b;
    if (mode == ScoreMode::EvalCosine) {
        out.zero_norm_tokens = detail::normalize_rows(an) + detail::normalize_rows(bn);
    }

    // Explicit enumeration of every token pair.
    double precision = 0.0;
    for (Eigen::Index j = 0; j < bn.rows(); ++j) {
        double best = -std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < an.rows(); ++i) {
            double dot = 0.0;
            for (Eigen::Index c = 0; c < an.cols(); ++c) dot += an(i, c) * bn(j, c);
            best = std::max(best, dot);
        }
        precision += best;
    }
    double recall = 0.0;
    for (Eigen::Index i = 0; i < an.rows(); ++i) {
        double best = -std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < bn.rows(); ++j) {
            double dot = 0.0;
            for (Eigen::Index c = 0; c < an.cols(); ++c) dot += an(i, c) * bn(j, c);
            best = std::max(best, dot);
        }
        recall += best;
    }
    out.precision = precision / static_cast<double>(bn.rows());
    out.recall = recall / static_cast<double>(an.rows());
    out.f = detail::harmonic(out.precision, out.recall);
    return out;
}

BertScoreBreakdown bert_score(const SentenceEmbedding& a, const SentenceEmbedding& b,
                              ScoreMode mode) {
    const Eigen::MatrixXd ad = a.matrix.cast<double>();
    const Eigen::MatrixXd bd = b.matrix.cast<double>();
    return bert_score(ad, bd, mode);
}

Eigen::MatrixXd score_tile(std::span<const SentenceEmbedding> src,
                           std::span<const SentenceEmbedding> tgt, ScoreMode mode,
                           const ScorerParams* params, std::size_t jobs) {
    if (!src.empty() && !tgt.empty() && src.front().dim() != tgt.front().dim()) {
        throw DataError("dimension mismatch: source dim " + std::to_string(src.front().dim()) +
                        ", target dim " + std::to_string(tgt.front().dim()));
    }
    const auto a = detail::pack(src, params, mode);
    const auto b = detail::pack(tgt, params, mode);
    if (a.zero_norm + b.zero_norm > 0) {
        detail::log().warn("{} zero-norm token vector(s) scored as zero", a.zero_norm + b.zero_norm);
    }

    Eigen::MatrixXd scores(static_cast<Eigen::Index>(src.size()),
                           static_cast<Eigen::Index>(tgt.size()));
    const auto a_groups = detail::group_boundaries(a, detail::kGroupTokenBudget);
    const auto b_groups = detail::group_boundaries(b, detail::kGroupTokenBudget);

    parallel_for(a_groups.size() - 1, jobs, [&](std::size_t ga) {
        const std::size_t s0 = a_groups[ga], s1 = a_groups[ga + 1];
        const Eigen::Index r0 = a.begin(s0);
        const Eigen::Index rows = a.offsets[s1] - r0;
        Eigen::MatrixXd g;
        for (std::size_t gb = 0; gb + 1 < b_groups.size(); ++gb) {
            const std::size_t t0 = b_groups[gb], t1 = b_groups[gb + 1];
            const Eigen::Index c0 = b.begin(t0);
            const Eigen::Index cols = b.offsets[t1] - c0;
            g.noalias() = a.scored.middleRows(r0, rows) * b.scored.middleRows(c0, cols).transpose();
            for (std::size_t i = s0; i < s1; ++i) {
                for (std::size_t j = t0; j < t1; ++j) {
                    const auto block =
                        g.block(a.begin(i) - r0, b.begin(j) - c0, a.length(i), b.length(j));
                    scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                        detail::reduce_block(block).f;
                }
            }
        }
    });
    return scores;
}

namespace {

Eigen::MatrixXd pooled_unit_vectors(std::span<const SentenceEmbedding> sentences,
                                    const ScorerParams* params) {
    const auto packed = detail::pack(sentences, params, ScoreMode::TrainDot);
    Eigen::MatrixXd pooled(static_cast<Eigen::Index>(sentences.size()), packed.projected.cols());
    for (std::size_t s = 0; s < sentences.size(); ++s) {
        pooled.row(static_cast<Eigen::Index>(s)) =
            packed.projected.middleRows(packed.begin(s), packed.length(s)).colwise().mean();
    }
    if (const auto zero = detail::normalize_rows(pooled); zero > 0) {
        detail::log().warn("{} zero-norm pooled vector(s) scored as 0", zero);
    }
    return pooled;
}

} // namespace

double avg_pool_similarity(const SentenceEmbedding& a, const SentenceEmbedding& b) {
    if (a.dim() != b.dim()) throw DataError("dimension mismatch");
    Eigen::RowVectorXd pa = a.matrix.cast<double>().colwise().mean();
    Eigen::RowVectorXd pb = b.matrix.cast<double>().colwise().mean();
    const double na = pa.norm(), nb = pb.norm();
    if (na == 0.0 || nb == 0.0) {
        detail::log().warn("zero-norm pooled vector scored as 0");
        return 0.0;
    }
    return pa.dot(pb) / (na * nb);
}

Eigen::MatrixXd avg_pool_tile(std::span<const SentenceEmbedding> src,
                              std::span<const SentenceEmbedding> tgt, const ScorerParams* params) {
    if (!src.empty() && !tgt.empty() && src.front().dim() != tgt.front().dim()) {
        throw DataError("dimension mismatch");
    }
    const Eigen::MatrixXd a = pooled_unit_vectors(src, params);
    const Eigen::MatrixXd b = pooled_unit_vectors(tgt, params);
    Eigen::MatrixXd scores = a * b.transpose();
    return scores;
}

Eigen::MatrixXd score_block(std::span<const SentenceEmbedding> src,
                            std::span<const SentenceEmbedding> tgt, Pooling pooling,
                            ScoreMode mode, const ScorerParams* params, std::size_t jobs) {
    if (pooling == Pooling::AvgPoolCosine) return avg_pool_tile(src, tgt, params);
    return score_tile(src, tgt, mode, params, jobs);
}

} // namespace aligner
