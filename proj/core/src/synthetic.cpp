#include "aligner/synthetic.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include <Eigen/QR>

#include "aligner/error.hpp"

namespace aligner {

namespace {

// Independent streams per purpose so that changing one knob (say, noise)
// leaves the other draws untouched.
std::mt19937_64 stream(std::uint64_t seed, std::uint64_t purpose) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(purpose)};
    return std::mt19937_64(seq);
}

enum Purpose : std::uint64_t {
    kContent = 1,
    kRotation = 2,
    kNoise = 3,
    kPopular = 4,
    kHub = 5,
    kOrder = 6,
};

std::size_t semantic_width(const SyntheticCorpusSpec& spec) {
    return spec.semantic_dim == 0 ? spec.dim : std::min(spec.semantic_dim, spec.dim);
}

// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the
// signs of R's diagonal folded into Q.
Eigen::MatrixXd random_orthogonal(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd g(n, n);
    for (Eigen::Index i = 0; i < g.rows(); ++i)
        for (Eigen::Index j = 0; j < g.cols(); ++j) g(i, j) = normal(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < q.cols(); ++j) {
        if (r(j, j) < 0) q.col(j) = -q.col(j);
    }
    return q;
}

} // namespace

void SyntheticCorpusSpec::validate() const {
    if (num_pairs == 0) throw ConfigError("num_pairs must be positive");
    if (dim == 0) throw ConfigError("dim must be positive");
    if (semantic_dim > dim) throw ConfigError("semantic_dim exceeds dim");
    if (min_tokens == 0 || min_tokens > max_tokens) {
        throw ConfigError("token range must satisfy 1 <= min_tokens <= max_tokens");
    }
    if (max_tokens > kDefaultMaxSeqLen) throw ConfigError("max_tokens exceeds max sequence length");
    if (!(noise_sigma >= 0.0)) throw ConfigError("noise_sigma must be >= 0");
    if (!(language_signal >= 0.0)) throw ConfigError("language_signal must be >= 0");
    if (!(popularity_fraction >= 0.0 && popularity_fraction <= 1.0)) {
        throw ConfigError("popularity_fraction must be in [0, 1]");
    }
    if (!std::isfinite(popularity_offset) || !std::isfinite(hub_bias)) {
        throw ConfigError("popularity_offset and hub_bias must be finite");
    }
}

Eigen::MatrixXd language_map(const SyntheticCorpusSpec& spec) {
    const std::size_t k = semantic_width(spec);
    Eigen::MatrixXd map = Eigen::MatrixXd::Identity(spec.dim, spec.dim);
    const std::size_t rest = spec.dim - k;
    if (rest < 2) return map;
    // A quarter turn in each of rest/2 random planes: Q J Q^T with J built
    // from [[0, 1], [-1, 0]] blocks. Its symmetric part is zero, so
    // E[n^T M map n] = 0 for every symmetric M and a scorer cannot profit
    // from the map of one particular pair. An odd leftover axis stays fixed.
    auto rng = stream(spec.rotation_seed, kRotation);
    const Eigen::MatrixXd q = random_orthogonal(rest, rng);
    Eigen::MatrixXd quarter = Eigen::MatrixXd::Zero(rest, rest);
    for (std::size_t b = 0; b + 1 < rest; b += 2) {
        quarter(b, b + 1) = 1.0;
        quarter(b + 1, b) = -1.0;
    }
    if (rest % 2 == 1) quarter(rest - 1, rest - 1) = 1.0;
    map.bottomRightCorner(rest, rest) = q * quarter * q.transpose();
    return map;
}

Eigen::VectorXd hub_direction(const SyntheticCorpusSpec& spec) {
    const std::size_t k = semantic_width(spec);
    auto rng = stream(spec.seed, kHub);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(spec.dim);
    for (std::size_t i = 0; i < k; ++i) u(i) = normal(rng);
    return u / u.norm();
}

SyntheticPair generate_synthetic_pair(const SyntheticCorpusSpec& spec) {
    spec.validate();
    const std::size_t d = spec.dim;
    const std::size_t k = semantic_width(spec);
    const Eigen::MatrixXd map = language_map(spec);
    const Eigen::VectorXd hub = hub_direction(spec);

    auto content = stream(spec.seed, kContent);
    auto noise_rng = stream(spec.seed, kNoise);
    auto popular_rng = stream(spec.seed, kPopular);
    auto order_rng = stream(spec.seed, kOrder);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> length(spec.min_tokens, spec.max_tokens);

    const std::size_t n = spec.num_pairs;
    std::vector<std::size_t> popular(n);
    std::iota(popular.begin(), popular.end(), 0);
    const auto n_popular = static_cast<std::size_t>(std::llround(spec.popularity_fraction * n));
    std::vector<std::size_t> chosen;
    std::sample(popular.begin(), popular.end(), std::back_inserter(chosen), n_popular, popular_rng);
    std::vector<bool> is_popular(n, false);
    for (auto i : chosen) is_popular[i] = true;

    // Target pool order is a seeded permutation so the gold map is not the
    // identity on indices.
    std::vector<std::size_t> tgt_slot(n);
    std::iota(tgt_slot.begin(), tgt_slot.end(), 0);
    std::shuffle(tgt_slot.begin(), tgt_slot.end(), order_rng);

    SyntheticPair out{TokenEmbeddingSet(d, spec.src_lang, "synthetic"),
                      TokenEmbeddingSet(d, spec.tgt_lang, "synthetic"),
                      {},
                      {}};
    std::vector<SentenceEmbedding> targets(n);
    out.gold.reserve(n);

    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t tokens = length(content);
        Eigen::MatrixXd x(tokens, d);
        for (std::size_t t = 0; t < tokens; ++t) {
            for (std::size_t c = 0; c < k; ++c) x(t, c) = normal(content);
            for (std::size_t c = k; c < d; ++c) x(t, c) = spec.language_signal * normal(content);
            x.row(t) += spec.hub_bias * hub.transpose();
        }

        Eigen::MatrixXd y = x * map;
        for (std::size_t t = 0; t < tokens; ++t) {
            for (std::size_t c = 0; c < d; ++c) y(t, c) += spec.noise_sigma * normal(noise_rng);
            if (is_popular[i]) y.row(t) += spec.popularity_offset * hub.transpose();
        }
        // Token order carries no information for BERT-score; shuffle it so
        // nothing else can lean on it.
        std::vector<Eigen::Index> perm(tokens);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), order_rng);
        Eigen::MatrixXd y_perm(tokens, d);
        for (std::size_t t = 0; t < tokens; ++t) y_perm.row(t) = y.row(perm[t]);

        const std::string src_id = spec.id_prefix + "-" + spec.src_lang + "-" + std::to_string(i);
        const std::string tgt_id = spec.id_prefix + "-" + spec.tgt_lang + "-" + std::to_string(i);
        out.src.add({src_id, x.cast<float>()});
        targets[tgt_slot[i]] = SentenceEmbedding{tgt_id, y_perm.cast<float>()};
        out.gold.push_back({src_id, tgt_id});
        if (is_popular[i]) out.popular_targets.push_back(tgt_slot[i]);
    }
    for (auto& t : targets) out.tgt.add(std::move(t));
    std::sort(out.popular_targets.begin(), out.popular_targets.end());
    return out;
}

SyntheticCorpusSpec default_synthetic_spec() {
    SyntheticCorpusSpec spec;
    spec.num_pairs = 512;
    spec.dim = 32;
    spec.semantic_dim = 16;
    spec.noise_sigma = 0.3;
    spec.hub_bias = 1.0;
    spec.popularity_fraction = 0.05;
    spec.popularity_offset = 2.0;
    return spec;
}

SyntheticCorpusSpec popularity_fixture_spec() {
    SyntheticCorpusSpec spec;
    spec.num_pairs = 400;
    spec.dim = 32;
    spec.semantic_dim = 16;
    spec.noise_sigma = 1.0;
    spec.hub_bias = 2.0;
    spec.popularity_fraction = 0.1;
    spec.popularity_offset = 6.0;
    spec.seed = 11;
    spec.rotation_seed = 3;
    return spec;
}

SyntheticCorpusSpec transfer_fixture_spec(std::uint64_t rotation_seed, std::uint64_t seed) {
    SyntheticCorpusSpec spec;
    spec.num_pairs = 500;
    spec.dim = 32;
    spec.semantic_dim = 16;
    spec.noise_sigma = 0.1;
    spec.language_signal = 3.0;
    spec.seed = seed;
    spec.rotation_seed = rotation_seed;
    return spec;
}

} // namespace aligner
