#include <doctest.h>

#include <random>

#include "aligner/error.hpp"
#include "aligner/similarity.hpp"
#include "oracles.hpp"
#include "random_data.hpp"

using namespace aligner;

namespace {

SentenceEmbedding sentence(const std::string& id, std::initializer_list<std::initializer_list<float>> rows) {
    TokenMatrix m(rows.size(), rows.begin()->size());
    Eigen::Index i = 0;
    for (const auto& r : rows) {
        Eigen::Index j = 0;
        for (float v : r) m(i, j++) = v;
        ++i;
    }
    return {id, m};
}

} // namespace

TEST_CASE("bert_score hand examples") {
    const auto e = sentence("e", {{1, 0}});
    auto s = bert_score(e, e, ScoreMode::EvalCosine);
    CHECK(s.precision == doctest::Approx(1.0));
    CHECK(s.recall == doctest::Approx(1.0));
    CHECK(s.f == doctest::Approx(1.0));

    const auto a = sentence("a", {{1, 0}, {0, 1}});
    const auto b = sentence("b", {{1, 0}});
    s = bert_score(a, b, ScoreMode::EvalCosine);
    CHECK(s.precision == doctest::Approx(1.0));
    CHECK(s.recall == doctest::Approx(0.5));
    CHECK(s.f == doctest::Approx(2.0 / 3.0));

    const auto swapped = bert_score(b, a, ScoreMode::EvalCosine);
    CHECK(swapped.precision == doctest::Approx(s.recall));
    CHECK(swapped.recall == doctest::Approx(s.precision));
    CHECK(swapped.f == doctest::Approx(s.f));
}

TEST_CASE("F is zero when P + R is zero") {
    // Every token pair is orthogonal, so P = R = 0.
    const auto s = bert_score(sentence("x", {{1, 0}, {-1, 0}}), sentence("y", {{0, 1}, {0, -1}}),
                              ScoreMode::EvalCosine);
    CHECK(s.precision == 0.0);
    CHECK(s.recall == 0.0);
    CHECK(s.f == 0.0);
}

TEST_CASE("zero-norm tokens score as zero vectors") {
    const auto z = sentence("z", {{0, 0}, {1, 0}});
    const auto s = bert_score(z, sentence("o", {{0, 1}}), ScoreMode::EvalCosine);
    CHECK(s.zero_norm_tokens == 1);
    CHECK(s.precision == doctest::Approx(0.0));
    CHECK(s.recall == doctest::Approx(0.0));
}

TEST_CASE("dimension mismatch is an error") {
    CHECK_THROWS_AS(bert_score(sentence("a", {{1, 0}}), sentence("b", {{1, 0, 0}}), ScoreMode::EvalCosine),
                    DataError);
}

TEST_CASE("bert_score agrees with the enumeration oracle") {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 300; ++t) {
        const std::size_t dim = 1 + rng() % 6;
        const auto a = testdata::random_sentences(rng, 1, dim, 1, 7, "a")[0];
        const auto b = testdata::random_sentences(rng, 1, dim, 1, 7, "b")[0];
        for (bool cosine : {true, false}) {
            const auto got = bert_score(a, b, cosine ? ScoreMode::EvalCosine : ScoreMode::TrainDot);
            const auto want = oracle::bert_score(oracle::rows_of(a.matrix), oracle::rows_of(b.matrix), cosine);
            CHECK(got.precision == doctest::Approx(want.p).epsilon(1e-9));
            CHECK(got.recall == doctest::Approx(want.r).epsilon(1e-9));
            CHECK(got.f == doctest::Approx(want.f).epsilon(1e-9));
        }
    }
}

TEST_CASE("score_tile matches looped oracle, with and without a projection") {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 20; ++t) {
        const std::size_t dim = 2 + rng() % 7;
        const auto src = testdata::random_sentences(rng, 1 + rng() % 9, dim, 1, 12, "s");
        const auto tgt = testdata::random_sentences(rng, 1 + rng() % 9, dim, 1, 12, "t");
        const auto params = ScorerParams::random(dim, 1 + rng() % 5, rng());
        for (auto mode : {ScoreMode::EvalCosine, ScoreMode::TrainDot}) {
            for (const ScorerParams* p : {static_cast<const ScorerParams*>(nullptr), &params}) {
                const auto tile = score_tile(src, tgt, mode, p, 1 + t % 3);
                REQUIRE(tile.rows() == static_cast<Eigen::Index>(src.size()));
                REQUIRE(tile.cols() == static_cast<Eigen::Index>(tgt.size()));
                const oracle::Rows w = p ? oracle::rows_of(p->weight) : oracle::Rows{};
                for (std::size_t i = 0; i < src.size(); ++i) {
                    for (std::size_t j = 0; j < tgt.size(); ++j) {
                        auto a = oracle::rows_of(src[i].matrix);
                        auto b = oracle::rows_of(tgt[j].matrix);
                        if (p) {
                            a = oracle::project(a, w);
                            b = oracle::project(b, w);
                        }
                        const double want = oracle::bert_score(a, b, mode == ScoreMode::EvalCosine).f;
                        CHECK(std::abs(tile(i, j) - want) < 1e-5 * std::max(1.0, std::abs(want)));
                    }
                }
            }
        }
    }
}

TEST_CASE("score_tile properties") {
    std::mt19937_64 rng(9);
    const auto s = testdata::random_sentences(rng, 6, 5, 1, 9, "s");
    const auto t = testdata::random_sentences(rng, 7, 5, 1, 9, "t");
    const auto st = score_tile(s, t, ScoreMode::EvalCosine);
    const auto ts = score_tile(t, s, ScoreMode::EvalCosine);
    CHECK((st - ts.transpose()).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(st.maxCoeff() <= 1.0 + 1e-9);
    CHECK(st.minCoeff() >= -1.0 - 1e-9);

    // Positive rescaling of one token: invisible to cosine, visible to dot.
    auto scaled = s;
    scaled[0].matrix.row(0) *= 3.0f;
    CHECK((score_tile(scaled, t, ScoreMode::EvalCosine) - st).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((score_tile(scaled, t, ScoreMode::TrainDot) - score_tile(s, t, ScoreMode::TrainDot))
              .cwiseAbs()
              .maxCoeff() > 1e-3);

    // Worker count does not change a single bit.
    CHECK(score_tile(s, t, ScoreMode::EvalCosine, nullptr, 1) == score_tile(s, t, ScoreMode::EvalCosine, nullptr, 4));
}

TEST_CASE("small fixed tiles") {
    const std::vector<SentenceEmbedding> e{sentence("e1", {{1, 0}}), sentence("e2", {{0, 1}})};
    const auto tile = score_tile(e, e, ScoreMode::EvalCosine);
    CHECK(tile(0, 0) == doctest::Approx(1.0));
    CHECK(tile(0, 1) == doctest::Approx(0.0));
    CHECK(tile(1, 0) == doctest::Approx(0.0));
    CHECK(tile(1, 1) == doctest::Approx(1.0));
}

TEST_CASE("average pooling") {
    const auto a = sentence("a", {{1, 2}, {3, 4}});
    CHECK(avg_pool_similarity(a, a) == doctest::Approx(1.0));
    CHECK(avg_pool_similarity(sentence("x", {{1, 0}}), sentence("y", {{0, 2}})) == doctest::Approx(0.0));

    std::mt19937_64 rng(21);
    for (int t = 0; t < 100; ++t) {
        const auto x = testdata::random_sentences(rng, 1, 4, 3, 3, "x")[0];
        const auto y = testdata::random_sentences(rng, 1, 4, 3, 3, "y")[0];
        std::vector<double> mx(4, 0.0), my(4, 0.0);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 4; ++j) {
                mx[j] += x.matrix(i, j) / 3.0;
                my[j] += y.matrix(i, j) / 3.0;
            }
        const double want = oracle::dot(oracle::unit(mx), oracle::unit(my));
        CHECK(avg_pool_similarity(x, y) == doctest::Approx(want).epsilon(1e-6));
    }
}
