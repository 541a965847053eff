#include "aligner/retrieval.hpp"

#include <iomanip>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "aligner/error.hpp"

namespace aligner {

namespace {

struct RowBest {
    Eigen::Index col = 0;
    bool tie = false;
};

RowBest row_argmax(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
    RowBest best;
    double value = row(0);
    for (Eigen::Index c = 1; c < row.size(); ++c) {
        if (row(c) > value) {
            value = row(c);
            best.col = c;
            best.tie = false;
        } else if (row(c) == value) {
            best.tie = true;
        }
    }
    return best;
}

RetrievalResult finish(std::size_t correct, std::size_t total, std::size_t ties) {
    RetrievalResult r;
    r.correct = correct;
    r.total = total;
    r.ties = ties;
    r.accuracy = total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
    return r;
}

RetrievalResult one_direction(std::span<const SentenceEmbedding> src,
                              std::span<const SentenceEmbedding> tgt,
                              std::span<const std::size_t> gold, const ScoringOptions& options) {
    std::size_t correct = 0, ties = 0;
    for_each_normalized_band(src, tgt, options, [&](Eigen::Index row0, const Eigen::MatrixXd& rows) {
        for (Eigen::Index r = 0; r < rows.rows(); ++r) {
            const auto best = row_argmax(rows.row(r));
            if (best.tie) ++ties;
            if (static_cast<std::size_t>(best.col) == gold[static_cast<std::size_t>(row0 + r)]) {
                ++correct;
            }
        }
    });
    return finish(correct, src.size(), ties);
}

} // namespace

RetrievalResult accuracy_from_scores(const Eigen::MatrixXd& scores,
                                     std::span<const std::size_t> gold) {
    if (static_cast<std::size_t>(scores.rows()) != gold.size()) {
        throw DataError("gold size does not match score rows");
    }
    if (scores.cols() == 0) throw DataError("empty candidate pool");
    std::size_t correct = 0, ties = 0;
    for (Eigen::Index r = 0; r < scores.rows(); ++r) {
        const auto best = row_argmax(scores.row(r));
        if (best.tie) ++ties;
        if (static_cast<std::size_t>(best.col) == gold[static_cast<std::size_t>(r)]) ++correct;
    }
    return finish(correct, gold.size(), ties);
}

RetrievalResult evaluate_retrieval(const RetrievalTask& task, const RetrievalOptions& options) {
    if (task.src.dim() != task.tgt.dim()) {
        throw DataError("dimension mismatch: " + std::to_string(task.src.dim()) + " vs " +
                        std::to_string(task.tgt.dim()));
    }
    const auto forward = gold_target_indices(task.gold, task.src, task.tgt);
    const auto there = one_direction(task.src.entries(), task.tgt.entries(), forward, options.scoring);
    if (!options.bidirectional) return there;

    std::vector<std::size_t> backward(forward.size());
    for (std::size_t s = 0; s < forward.size(); ++s) backward[forward[s]] = s;
    const auto back = one_direction(task.tgt.entries(), task.src.entries(), backward, options.scoring);
    RetrievalResult both = finish(there.correct + back.correct, there.total + back.total,
                                  there.ties + back.ties);
    both.accuracy = 0.5 * (there.accuracy + back.accuracy);
    return both;
}

std::pair<std::string, std::string> split_pair_label(const std::string& label) {
    const auto dash = label.find('-');
    if (dash == std::string::npos || dash == 0 || dash + 1 == label.size() ||
        label.find('-', dash + 1) != std::string::npos) {
        throw DataError("malformed pair label '" + label + "', expected xx-yy");
    }
    return {label.substr(0, dash), label.substr(dash + 1)};
}

EvalReport aggregate(const std::map<std::string, double>& per_pair, std::string settings) {
    if (per_pair.empty()) throw DataError("nothing to aggregate");
    EvalReport report;
    report.per_pair = per_pair;
    report.settings = std::move(settings);

    std::map<std::string, std::pair<double, std::size_t>> sums;
    double total = 0.0;
    for (const auto& [label, accuracy] : per_pair) {
        const auto [a, b] = split_pair_label(label);
        total += accuracy;
        auto& sa = sums[a];
        sa.first += accuracy;
        ++sa.second;
        if (b != a) {
            auto& sb = sums[b];
            sb.first += accuracy;
            ++sb.second;
        }
    }
    for (const auto& [lang, s] : sums) {
        report.per_language[lang] = s.first / static_cast<double>(s.second);
    }
    report.overall = total / static_cast<double>(per_pair.size());
    return report;
}

std::string report_to_jsonl(const EvalReport& report,
                            const std::map<std::string, RetrievalResult>& details) {
    std::ostringstream out;
    for (const auto& [label, accuracy] : report.per_pair) {
        nlohmann::ordered_json j;
        j["pair"] = label;
        j["accuracy"] = accuracy;
        if (auto it = details.find(label); it != details.end()) {
            j["correct"] = it->second.correct;
            j["total"] = it->second.total;
            j["ties"] = it->second.ties;
        }
        out << j.dump() << '\n';
    }
    nlohmann::ordered_json summary;
    summary["summary"] = true;
    summary["overall"] = report.overall;
    summary["per_language"] = report.per_language;
    summary["settings"] = report.settings;
    out << summary.dump() << '\n';
    return out.str();
}

std::string render_report(const EvalReport& report) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(2);
    out << "pair          accuracy\n";
    for (const auto& [label, accuracy] : report.per_pair) {
        out << std::left << std::setw(14) << label << std::right << std::setw(8) << 100.0 * accuracy
            << '\n';
    }
    out << std::left << std::setw(14) << "average" << std::right << std::setw(8)
        << 100.0 * report.overall << '\n';
    if (report.per_language.size() > 2) {
        out << "\nlanguage      accuracy\n";
        for (const auto& [lang, accuracy] : report.per_language) {
            out << std::left << std::setw(14) << lang << std::right << std::setw(8)
                << 100.0 * accuracy << '\n';
        }
    }
    if (!report.settings.empty()) out << "\n" << report.settings << '\n';
    return out.str();
}

std::string describe_settings(const RetrievalOptions& options, const std::string& scorer) {
    const auto& s = options.scoring;
    std::ostringstream out;
    out << "pooling=" << to_string(s.pooling) << " mode=" << to_string(s.mode);
    if (s.norm.enabled) {
        out << " norm=" << to_string(s.norm.scope) << " alpha=" << s.norm.alpha;
        if (s.norm.scope == NormScope::Tile) out << " tile=" << s.norm.tile_size;
    } else {
        out << " norm=off";
    }
    out << " direction=" << (options.bidirectional ? "both" : "src->tgt");
    out << " scorer=" << (scorer.empty() ? "identity" : scorer);
    return out.str();
}

} // namespace aligner
