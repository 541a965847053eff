#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include <Eigen/Core>

namespace aligner {

// Bias-free linear projection applied to every token vector before scoring:
// projected = token * weight, weight is in_dim x out_dim.
struct ScorerParams {
    Eigen::MatrixXd weight;

    std::size_t in_dim() const { return static_cast<std::size_t>(weight.rows()); }
    std::size_t out_dim() const { return static_cast<std::size_t>(weight.cols()); }

    // Square: identity. Rectangular: truncated identity.
    static ScorerParams identity(std::size_t in_dim, std::size_t out_dim);
    // i.i.d. N(0, 1/out_dim) entries.
    static ScorerParams random(std::size_t in_dim, std::size_t out_dim, std::uint64_t seed);

    // Throws DataError on non-finite entries or an empty matrix.
    void validate() const;
};

// Checkpoint: magic "TSCR" | version u16 = 1 | in_dim u32 | out_dim u32 |
// f32 weights, row-major, little-endian.
inline constexpr char kCheckpointMagic[4] = {'T', 'S', 'C', 'R'};
inline constexpr std::uint16_t kCheckpointVersion = 1;

std::uint64_t write_checkpoint(const ScorerParams& params, std::ostream& out);
ScorerParams read_checkpoint(std::istream& in);
void save_checkpoint(const ScorerParams& params, const std::filesystem::path& path);
ScorerParams load_checkpoint(const std::filesystem::path& path);

} // namespace aligner
