#pragma once

#include <random>
#include <string>
#include <vector>

#include <aligner/embedding_store.hpp>

namespace bench {

// Gaussian sentences, fixed seed so runs compare.
inline std::vector<aligner::SentenceEmbedding> sentences(std::size_t count, std::size_t dim,
                                                         std::size_t tokens, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> normal;
    std::vector<aligner::SentenceEmbedding> out;
    for (std::size_t i = 0; i < count; ++i) {
        aligner::TokenMatrix m(tokens, dim);
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = normal(rng);
        out.push_back({"s" + std::to_string(i), std::move(m)});
    }
    return out;
}

} // namespace bench
