#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "aligner/normalization.hpp"
#include "aligner/retrieval.hpp"
#include "aligner/similarity.hpp"
#include "aligner/synthetic.hpp"

namespace aligner {

struct FileTaskSource {
    std::filesystem::path src;
    std::filesystem::path tgt;
    std::filesystem::path gold;
};

struct AblationTask {
    std::string label;
    // Synthetic tasks are regenerated per grid seed (the seed replaces the
    // spec's content seed); file tasks ignore the seed axis.
    std::variant<SyntheticCorpusSpec, FileTaskSource> source;
};

struct AblationGrid {
    std::vector<Pooling> pooling{Pooling::AvgPoolCosine, Pooling::BertScore};
    std::vector<bool> normalization{false, true};
    std::vector<double> alphas{0.75};
    std::vector<std::uint64_t> seeds{1};
    std::vector<AblationTask> tasks;
    NormScope scope = NormScope::Pool;
    std::size_t tile_size = 256;

    void validate() const; // ConfigError on any empty axis
};

struct AblationCell {
    std::string task;
    Pooling pooling = Pooling::BertScore;
    bool normalized = true;
    double alpha = 0.75;
    std::uint64_t seed = 0;
    RetrievalResult result;
};

// Every (task, seed, pooling, normalization, alpha) cell, in that nesting
// order regardless of how the cells were scheduled.
std::vector<AblationCell> run_grid(const AblationGrid& grid, std::size_t jobs = 1);

// Evaluates one cell. Exposed so callers can check cell independence.
AblationCell run_cell(const AblationTask& task, const RetrievalTask& data, Pooling pooling,
                      bool normalized, double alpha, std::uint64_t seed, const AblationGrid& grid);

RetrievalTask materialize_task(const AblationTask& task, std::uint64_t seed);

AblationGrid parse_grid_json(const std::string& text, const std::filesystem::path& base_dir = {});
AblationGrid load_grid(const std::filesystem::path& path);

std::string cells_to_jsonl(const std::vector<AblationCell>& cells);
// Table 1 layout: one row per task, columns pooling x {w/o norm, norm},
// one block per (alpha, seed).
std::string render_grid(const std::vector<AblationCell>& cells);

} // namespace aligner
