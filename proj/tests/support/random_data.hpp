#pragma once

#include <random>
#include <string>

#include "aligner/embedding_store.hpp"
#include "aligner/scorer_params.hpp"

namespace testdata {

inline aligner::TokenMatrix random_tokens(std::mt19937_64& rng, std::size_t tokens, std::size_t dim) {
    std::normal_distribution<float> normal(0.0f, 1.0f);
    aligner::TokenMatrix m(tokens, dim);
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = normal(rng);
    return m;
}

inline std::vector<aligner::SentenceEmbedding> random_sentences(std::mt19937_64& rng, std::size_t count,
                                                                std::size_t dim, std::size_t min_tokens,
                                                                std::size_t max_tokens,
                                                                const std::string& prefix = "s") {
    std::uniform_int_distribution<std::size_t> len(min_tokens, max_tokens);
    std::vector<aligner::SentenceEmbedding> out;
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back({prefix + std::to_string(i), random_tokens(rng, len(rng), dim)});
    }
    return out;
}

inline aligner::TokenEmbeddingSet to_set(std::vector<aligner::SentenceEmbedding> sentences, std::size_t dim,
                                         const std::string& lang = "xx") {
    aligner::TokenEmbeddingSet set(dim, lang, "test");
    for (auto& s : sentences) set.add(std::move(s));
    return set;
}

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
    std::normal_distribution<double> normal(0.0, scale);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
    return m;
}

} // namespace testdata
