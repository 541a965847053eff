#include <doctest.h>

#include <algorithm>

#include "aligner/ablation.hpp"
#include "aligner/error.hpp"

using namespace aligner;

namespace {

AblationGrid popularity_grid() {
    AblationGrid g;
    const auto spec = popularity_fixture_spec();
    g.tasks.push_back({"pop", spec});
    g.seeds = {spec.seed};
    return g;
}

const AblationCell& find(const std::vector<AblationCell>& cells, Pooling p, bool norm, double alpha) {
    auto it = std::find_if(cells.begin(), cells.end(), [&](const AblationCell& c) {
        return c.pooling == p && c.normalized == norm && c.alpha == alpha;
    });
    REQUIRE(it != cells.end());
    return *it;
}

} // namespace

TEST_CASE("a one-cell grid equals a direct evaluation") {
    AblationGrid g;
    auto spec = default_synthetic_spec();
    spec.num_pairs = 64;
    g.tasks.push_back({"t", spec});
    g.pooling = {Pooling::BertScore};
    g.normalization = {true};
    g.seeds = {9};
    const auto cells = run_grid(g);
    REQUIRE(cells.size() == 1);

    spec.seed = 9;
    auto data = generate_synthetic_pair(spec);
    RetrievalOptions o;
    o.scoring.norm = {0.75, NormScope::Pool, 256, true};
    const auto direct = evaluate_retrieval({data.src, data.tgt, data.gold, "t"}, o);
    CHECK(cells[0].result.accuracy == direct.accuracy);
    CHECK(cells[0].result.correct == direct.correct);
}

TEST_CASE("popularity fixture: token matching and normalization both help") {
    auto g = popularity_grid();
    g.alphas = {0.0, 0.75};
    const auto cells = run_grid(g);
    CHECK(cells.size() == 8);
    const double bert_norm = find(cells, Pooling::BertScore, true, 0.75).result.accuracy;
    const double bert_off = find(cells, Pooling::BertScore, false, 0.75).result.accuracy;
    const double avg_off = find(cells, Pooling::AvgPoolCosine, false, 0.75).result.accuracy;
    const double bert_a0 = find(cells, Pooling::BertScore, true, 0.0).result.accuracy;
    CHECK(bert_norm > bert_off);
    CHECK(bert_norm >= avg_off + 0.05);
    CHECK(bert_norm >= bert_a0);
}

TEST_CASE("output is independent of job count and stable") {
    auto g = popularity_grid();
    g.alphas = {0.5, 0.75};
    const auto a = cells_to_jsonl(run_grid(g, 1));
    const auto b = cells_to_jsonl(run_grid(g, 4));
    CHECK(a == b);
    CHECK(std::count(a.begin(), a.end(), '\n') == 8);
    CHECK(render_grid(run_grid(g, 2)).find("pop ") != std::string::npos);
}

TEST_CASE("grid parsing") {
    const auto g = parse_grid_json(R"({
        "pooling": ["bert-score"], "normalization": ["on", "off"], "alphas": [0.5],
        "seeds": [1, 2], "scope": "tile", "tile_size": 32,
        "tasks": [{"synthetic": {"num_pairs": 16}}, {"label": "f", "src": "a.temb", "tgt": "b.temb", "gold": "g.tsv"}]
    })", "/data");
    CHECK(g.pooling == std::vector<Pooling>{Pooling::BertScore});
    CHECK(g.normalization == std::vector<bool>{true, false});
    CHECK(g.seeds.size() == 2);
    CHECK(g.scope == NormScope::Tile);
    CHECK(g.tile_size == 32);
    REQUIRE(g.tasks.size() == 2);
    CHECK(std::get<SyntheticCorpusSpec>(g.tasks[0].source).num_pairs == 16);
    CHECK(std::get<FileTaskSource>(g.tasks[1].source).src == std::filesystem::path("/data/a.temb"));

    CHECK_THROWS_AS(parse_grid_json("{\"tasks\": 3"), ConfigError);
    CHECK_THROWS_AS(parse_grid_json(R"({"normalization": ["maybe"], "tasks": []})"), ConfigError);
    AblationGrid empty;
    CHECK_THROWS_AS(run_grid(empty), ConfigError);
    CHECK_THROWS_AS(load_grid("/nonexistent/grid.json"), DataError);
}
