#pragma once

// Batched BERT-score building blocks shared by scoring and training.

#include <span>
#include <vector>

#include <Eigen/Core>

#include "aligner/embedding_store.hpp"
#include "aligner/scorer_params.hpp"
#include "aligner/similarity.hpp"

namespace aligner::detail {

// Sentences concatenated row-wise. Sentence s owns rows
// [offsets[s], offsets[s + 1]).
struct PackedTokens {
    Eigen::MatrixXd input;     // raw tokens, promoted to double
    Eigen::MatrixXd projected; // input * weight (or input when no params)
    Eigen::MatrixXd scored;    // projected, length-normalized in EvalCosine mode
    Eigen::VectorXd norms;     // row norms of `projected` (EvalCosine only)
    std::vector<Eigen::Index> offsets;
    std::size_t zero_norm = 0;

    std::size_t sentences() const { return offsets.size() - 1; }
    Eigen::Index begin(std::size_t s) const { return offsets[s]; }
    Eigen::Index length(std::size_t s) const { return offsets[s + 1] - offsets[s]; }
};

PackedTokens pack(std::span<const SentenceEmbedding> sentences, const ScorerParams* params,
                  ScoreMode mode, bool keep_input = false);

// Scales rows to unit length in place; zero rows stay zero. Returns the
// number of zero rows.
std::size_t normalize_rows(Eigen::MatrixXd& rows, Eigen::VectorXd* norms = nullptr);

struct BlockScore {
    double precision = 0.0;
    double recall = 0.0;
    double f = 0.0;
};

inline double harmonic(double p, double r) {
    const double sum = p + r;
    return sum == 0.0 ? 0.0 : 2.0 * p * r / sum;
}

// g is |a| x |b| token similarities. precision: mean over columns of the
// column max; recall: mean over rows of the row max. Ties pick the lower
// index. When the argmax vectors are given they receive, per column, the
// winning row (best_row_for_col) and, per row, the winning column.
BlockScore reduce_block(const Eigen::Ref<const Eigen::MatrixXd>& g,
                        std::vector<Eigen::Index>* best_row_for_col = nullptr,
                        std::vector<Eigen::Index>* best_col_for_row = nullptr);

// Contiguous sentence groups holding at most `token_budget` rows each (a
// single longer sentence forms its own group). Returned as sentence-index
// boundaries.
std::vector<std::size_t> group_boundaries(const PackedTokens& packed, Eigen::Index token_budget);

inline constexpr Eigen::Index kGroupTokenBudget = 2048;

} // namespace aligner::detail
