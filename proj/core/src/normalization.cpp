#include "aligner/normalization.hpp"

#include <string>

#include "aligner/error.hpp"

namespace aligner {

const char* to_string(NormScope scope) { return scope == NormScope::Pool ? "pool" : "tile"; }

NormScope parse_norm_scope(std::string_view text) {
    if (text == "pool") return NormScope::Pool;
    if (text == "tile") return NormScope::Tile;
    throw ConfigError("unknown normalization scope '" + std::string(text) + "'");
}

void NormalizationConfig::validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must be in [0, 1]");
    if (scope == NormScope::Tile && tile_size < 2) throw ConfigError("tile_size must be >= 2");
    if (tile_size == 0) throw ConfigError("tile_size must be positive");
}

void apply_normalization(Eigen::Ref<Eigen::MatrixXd> scores,
                         const Eigen::Ref<const Eigen::VectorXd>& row_means,
                         const Eigen::Ref<const Eigen::VectorXd>& col_means, double grand_mean,
                         double alpha) {
    const double correction = (2.0 * alpha - 1.0) * grand_mean;
    for (Eigen::Index j = 0; j < scores.cols(); ++j) {
        for (Eigen::Index i = 0; i < scores.rows(); ++i) {
            scores(i, j) = scores(i, j) - alpha * (row_means(i) + col_means(j)) + correction;
        }
    }
}

SimilarityTile normalize(const Eigen::MatrixXd& raw, const NormalizationConfig& config) {
    config.validate();
    if (raw.rows() == 0 || raw.cols() == 0) throw DataError("cannot normalize an empty matrix");
    if (!raw.allFinite()) throw DataError("non-finite similarity score");

    SimilarityTile tile;
    tile.raw = raw;
    tile.config = config;
    tile.row_means = raw.rowwise().mean();
    tile.col_means = raw.colwise().mean().transpose();
    tile.grand_mean = tile.row_means.mean();
    tile.normalized = raw;
    if (config.enabled) {
        apply_normalization(tile.normalized, tile.row_means, tile.col_means, tile.grand_mean,
                            config.alpha);
    }
    return tile;
}

std::vector<Eigen::Index> tile_boundaries(Eigen::Index extent, std::size_t tile_size) {
    const auto step = static_cast<Eigen::Index>(tile_size);
    std::vector<Eigen::Index> bounds{0};
    while (bounds.back() < extent) {
        bounds.push_back(std::min(extent, bounds.back() + step));
    }
    if (bounds.size() > 2 && bounds[bounds.size() - 1] - bounds[bounds.size() - 2] == 1) {
        bounds.erase(bounds.end() - 2);
    }
    return bounds;
}

std::vector<SimilarityTile> normalize_streamed(const Eigen::MatrixXd& pool_raw,
                                               const NormalizationConfig& config) {
    config.validate();
    if (config.tile_size < 2) throw ConfigError("tile_size must be >= 2");
    if (pool_raw.rows() < 2 || pool_raw.cols() < 2) {
        throw DataError("tile smaller than 2 in a dimension: pool is " +
                        std::to_string(pool_raw.rows()) + "x" + std::to_string(pool_raw.cols()));
    }
    const auto rb = tile_boundaries(pool_raw.rows(), config.tile_size);
    const auto cb = tile_boundaries(pool_raw.cols(), config.tile_size);
    std::vector<SimilarityTile> tiles;
    tiles.reserve((rb.size() - 1) * (cb.size() - 1));
    for (std::size_t r = 0; r + 1 < rb.size(); ++r) {
        for (std::size_t c = 0; c + 1 < cb.size(); ++c) {
            const Eigen::MatrixXd block =
                pool_raw.block(rb[r], cb[c], rb[r + 1] - rb[r], cb[c + 1] - cb[c]);
            auto tile = normalize(block, config);
            tile.row0 = rb[r];
            tile.col0 = cb[c];
            tiles.push_back(std::move(tile));
        }
    }
    return tiles;
}

Eigen::MatrixXd normalize_pool(const Eigen::MatrixXd& pool_raw, const NormalizationConfig& config) {
    config.validate();
    if (!config.enabled) return pool_raw;
    if (config.scope == NormScope::Pool) return normalize(pool_raw, config).normalized;
    Eigen::MatrixXd out(pool_raw.rows(), pool_raw.cols());
    for (const auto& tile : normalize_streamed(pool_raw, config)) {
        out.block(tile.row0, tile.col0, tile.normalized.rows(), tile.normalized.cols()) =
            tile.normalized;
    }
    return out;
}

Eigen::MatrixXd normalize_backward(const Eigen::MatrixXd& grad, double alpha) {
    const auto m = static_cast<double>(grad.rows());
    const auto n = static_cast<double>(grad.cols());
    const Eigen::VectorXd row_sums = grad.rowwise().sum();
    const Eigen::RowVectorXd col_sums = grad.colwise().sum();
    const double total = row_sums.sum();
    Eigen::MatrixXd out = grad;
    out.colwise() -= (alpha / n) * row_sums;
    out.rowwise() -= (alpha / m) * col_sums;
    out.array() += (2.0 * alpha - 1.0) * total / (m * n);
    return out;
}

} // namespace aligner
