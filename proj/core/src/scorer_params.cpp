#include "aligner/scorer_params.hpp"

#include <cstring>
#include <fstream>
#include <random>

#include "aligner/error.hpp"
#include "binary_io.hpp"

namespace aligner {

ScorerParams ScorerParams::identity(std::size_t in_dim, std::size_t out_dim) {
    if (in_dim == 0 || out_dim == 0) throw ConfigError("scorer dims must be positive");
    return {Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(in_dim),
                                      static_cast<Eigen::Index>(out_dim))};
}

ScorerParams ScorerParams::random(std::size_t in_dim, std::size_t out_dim, std::uint64_t seed) {
    if (in_dim == 0 || out_dim == 0) throw ConfigError("scorer dims must be positive");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(out_dim)));
    Eigen::MatrixXd w(in_dim, out_dim);
    for (Eigen::Index i = 0; i < w.rows(); ++i)
        for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = normal(rng);
    return {std::move(w)};
}

void ScorerParams::validate() const {
    if (weight.size() == 0) throw DataError("scorer weight is empty");
    if (!weight.allFinite()) throw DataError("scorer weight has non-finite entries");
}

std::uint64_t write_checkpoint(const ScorerParams& params, std::ostream& out) {
    params.validate();
    out.write(kCheckpointMagic, 4);
    detail::put_le(out, kCheckpointVersion);
    detail::put_le(out, static_cast<std::uint32_t>(params.in_dim()));
    detail::put_le(out, static_cast<std::uint32_t>(params.out_dim()));
    for (Eigen::Index i = 0; i < params.weight.rows(); ++i)
        for (Eigen::Index j = 0; j < params.weight.cols(); ++j)
            detail::put_f32(out, static_cast<float>(params.weight(i, j)));
    if (!out) throw DataError("I/O failure while writing checkpoint");
    return 4 + 2 + 4 + 4 + 4ull * params.weight.size();
}

ScorerParams read_checkpoint(std::istream& in) {
    char magic[4] = {};
    if (!in.read(magic, 4)) throw FormatError("truncated checkpoint header");
    if (std::memcmp(magic, kCheckpointMagic, 4) != 0) throw FormatError("bad magic");
    std::uint16_t version = 0;
    std::uint32_t in_dim = 0, out_dim = 0;
    if (!detail::get_le(in, version)) throw FormatError("truncated checkpoint header");
    if (version != kCheckpointVersion) {
        throw FormatError("unsupported version " + std::to_string(version));
    }
    if (!detail::get_le(in, in_dim) || !detail::get_le(in, out_dim)) {
        throw FormatError("truncated checkpoint header");
    }
    if (in_dim == 0 || out_dim == 0) throw FormatError("checkpoint has a zero dimension");
    ScorerParams params{Eigen::MatrixXd(in_dim, out_dim)};
    std::vector<unsigned char> buf(4ull * in_dim * out_dim);
    if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()))) {
        throw FormatError("truncated checkpoint weights");
    }
    std::size_t k = 0;
    for (Eigen::Index i = 0; i < params.weight.rows(); ++i)
        for (Eigen::Index j = 0; j < params.weight.cols(); ++j, k += 4)
            params.weight(i, j) = detail::f32_from_le(buf.data() + k);
    if (!params.weight.allFinite()) throw FormatError("non-finite checkpoint weight");
    return params;
}

void save_checkpoint(const ScorerParams& params, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    write_checkpoint(params, out);
}

ScorerParams load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    return read_checkpoint(in);
}

} // namespace aligner
