#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "aligner/alignment.hpp"
#include "aligner/embedding_store.hpp"
#include "aligner/scoring_engine.hpp"

namespace aligner {

// Ranking task: every source must pick its gold target out of the whole
// target pool.
struct RetrievalTask {
    TokenEmbeddingSet src;
    TokenEmbeddingSet tgt;
    Alignment gold;
    std::string pair_label; // "xx-yy"
};

struct RetrievalOptions {
    ScoringOptions scoring;
    // Average source->target and target->source accuracy.
    bool bidirectional = false;
};

struct RetrievalResult {
    double accuracy = 0.0;
    std::size_t correct = 0;
    std::size_t total = 0;
    std::size_t ties = 0; // rows whose maximum was attained more than once
};

// Argmax per row (ties to the lowest column); gold[i] is the gold column of
// row i.
RetrievalResult accuracy_from_scores(const Eigen::MatrixXd& scores,
                                     std::span<const std::size_t> gold);

// Throws DataError on pool-size mismatch or a non-bijective gold map.
RetrievalResult evaluate_retrieval(const RetrievalTask& task, const RetrievalOptions& options);

struct EvalReport {
    std::map<std::string, double> per_pair;
    std::map<std::string, double> per_language;
    double overall = 0.0;
    std::string settings;
};

// Splits "xx-yy" into its two languages. Throws DataError when malformed.
std::pair<std::string, std::string> split_pair_label(const std::string& label);

// per_language[X] is the mean over every pair whose label involves X;
// overall is the unweighted mean over pairs. Throws DataError when empty.
EvalReport aggregate(const std::map<std::string, double>& per_pair, std::string settings = {});

// One JSON object per pair followed by a summary object.
std::string report_to_jsonl(const EvalReport& report,
                            const std::map<std::string, RetrievalResult>& details);
std::string render_report(const EvalReport& report);

std::string describe_settings(const RetrievalOptions& options, const std::string& scorer);

} // namespace aligner
