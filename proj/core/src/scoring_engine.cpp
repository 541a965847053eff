#include "aligner/scoring_engine.hpp"

#include "aligner/error.hpp"

namespace aligner {

namespace {

Eigen::MatrixXd raw_band(std::span<const SentenceEmbedding> src,
                         std::span<const SentenceEmbedding> tgt, Eigen::Index row0,
                         Eigen::Index rows, const ScoringOptions& o) {
    return score_block(src.subspan(static_cast<std::size_t>(row0), static_cast<std::size_t>(rows)),
                       tgt, o.pooling, o.mode, o.params, o.jobs);
}

} // namespace

void for_each_normalized_band(std::span<const SentenceEmbedding> src,
                              std::span<const SentenceEmbedding> tgt, const ScoringOptions& options,
                              const BandSink& sink) {
    options.norm.validate();
    if (src.empty() || tgt.empty()) throw DataError("cannot score an empty pool");
    const auto m = static_cast<Eigen::Index>(src.size());
    const auto n = static_cast<Eigen::Index>(tgt.size());
    const auto band = options.band_size == 0 ? m : static_cast<Eigen::Index>(options.band_size);

    if (!options.norm.enabled) {
        for (Eigen::Index r0 = 0; r0 < m; r0 += band) {
            sink(r0, raw_band(src, tgt, r0, std::min(band, m - r0), options));
        }
        return;
    }

    if (options.norm.scope == NormScope::Tile) {
        if (m < 2 || n < 2) {
            throw DataError("tile-scope normalization needs at least 2 sources and 2 targets");
        }
        const auto rows = tile_boundaries(m, options.norm.tile_size);
        const auto cols = tile_boundaries(n, options.norm.tile_size);
        for (std::size_t r = 0; r + 1 < rows.size(); ++r) {
            Eigen::MatrixXd scores = raw_band(src, tgt, rows[r], rows[r + 1] - rows[r], options);
            for (std::size_t c = 0; c + 1 < cols.size(); ++c) {
                auto block = scores.middleCols(cols[c], cols[c + 1] - cols[c]);
                const Eigen::MatrixXd raw = block;
                block = normalize(raw, options.norm).normalized;
            }
            sink(rows[r], scores);
        }
        return;
    }

    if (band >= m) {
        sink(0, normalize(raw_band(src, tgt, 0, m, options), options.norm).normalized);
        return;
    }

    // Pool scope, two passes: statistics first, then the affine map.
    Eigen::VectorXd row_means(m);
    Eigen::VectorXd col_sums = Eigen::VectorXd::Zero(n);
    for (Eigen::Index r0 = 0; r0 < m; r0 += band) {
        const Eigen::Index rows = std::min(band, m - r0);
        const Eigen::MatrixXd raw = raw_band(src, tgt, r0, rows, options);
        if (!raw.allFinite()) throw DataError("non-finite similarity score");
        row_means.segment(r0, rows) = raw.rowwise().mean();
        col_sums += raw.colwise().sum().transpose();
    }
    const Eigen::VectorXd col_means = col_sums / static_cast<double>(m);
    const double grand_mean = row_means.mean();
    for (Eigen::Index r0 = 0; r0 < m; r0 += band) {
        const Eigen::Index rows = std::min(band, m - r0);
        Eigen::MatrixXd scores = raw_band(src, tgt, r0, rows, options);
        apply_normalization(scores, row_means.segment(r0, rows), col_means, grand_mean,
                            options.norm.alpha);
        sink(r0, scores);
    }
}

Eigen::MatrixXd normalized_scores(std::span<const SentenceEmbedding> src,
                                  std::span<const SentenceEmbedding> tgt,
                                  const ScoringOptions& options) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(src.size()), static_cast<Eigen::Index>(tgt.size()));
    for_each_normalized_band(src, tgt, options, [&](Eigen::Index row0, const Eigen::MatrixXd& rows) {
        out.middleRows(row0, rows.rows()) = rows;
    });
    return out;
}

} // namespace aligner
