#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace aligner {

enum class NormScope { Pool, Tile };

const char* to_string(NormScope scope);
NormScope parse_norm_scope(std::string_view text);

struct NormalizationConfig {
    double alpha = 0.75;
    NormScope scope = NormScope::Pool;
    std::size_t tile_size = 256;
    // false bypasses normalization entirely: normalized == raw.
    bool enabled = true;

    // Throws ConfigError.
    void validate() const;
};

/// Raw scores and their in-batch normalized counterpart:
///
///   S_ij = f_ij - alpha * (row_mean_i + col_mean_j) + (2*alpha - 1) * grand_mean
///
/// The grand-mean term keeps mean(S) at zero for every alpha.
struct SimilarityTile {
    Eigen::MatrixXd raw;
    Eigen::MatrixXd normalized;
    Eigen::VectorXd row_means;
    Eigen::VectorXd col_means;
    double grand_mean = 0.0;
    NormalizationConfig config;
    // Position of this tile inside a larger pool (0, 0 for a whole pool).
    Eigen::Index row0 = 0;
    Eigen::Index col0 = 0;
};

// Single affine pass with statistics from `raw` only. Throws DataError on
// non-finite input or an empty matrix.
SimilarityTile normalize(const Eigen::MatrixXd& raw, const NormalizationConfig& config);

// Affine map for given statistics; shared by the one-shot and the two-pass
// banded paths.
void apply_normalization(Eigen::Ref<Eigen::MatrixXd> scores,
                         const Eigen::Ref<const Eigen::VectorXd>& row_means,
                         const Eigen::Ref<const Eigen::VectorXd>& col_means, double grand_mean,
                         double alpha);

// Boundaries of contiguous tile_size blocks covering [0, extent). A trailing
// block of a single element is merged into its predecessor so that no tile
// is degenerate. Returned vector starts at 0 and ends at extent.
std::vector<Eigen::Index> tile_boundaries(Eigen::Index extent, std::size_t tile_size);

// Tile scope: each tile of the pool cross-product is normalized with its
// own statistics. Tiles come out row-major. Throws ConfigError when
// tile_size < 2 and DataError when the pool has a dimension of 1.
std::vector<SimilarityTile> normalize_streamed(const Eigen::MatrixXd& pool_raw,
                                               const NormalizationConfig& config);

// Full normalized pool matrix for either scope (or raw when disabled).
Eigen::MatrixXd normalize_pool(const Eigen::MatrixXd& pool_raw, const NormalizationConfig& config);

// Backward pass of `normalize`: maps dL/dS to dL/df.
Eigen::MatrixXd normalize_backward(const Eigen::MatrixXd& grad_normalized, double alpha);

} // namespace aligner
