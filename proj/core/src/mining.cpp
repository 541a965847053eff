#include "aligner/mining.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "aligner/error.hpp"

namespace aligner {

const char* to_string(CandidateRule rule) {
    return rule == CandidateRule::BestPerSource ? "best" : "mutual";
}

CandidateRule parse_candidate_rule(std::string_view text) {
    if (text == "best" || text == "best-per-source") return CandidateRule::BestPerSource;
    if (text == "mutual" || text == "mutual-best") return CandidateRule::MutualBest;
    throw ConfigError("unknown candidate rule '" + std::string(text) + "'");
}

void MiningConfig::validate() const {
    if (threshold && !std::isfinite(*threshold)) throw ConfigError("threshold must be finite");
    scoring.norm.validate();
}

std::vector<ScoredPair> mine_candidates(std::span<const SentenceEmbedding> src,
                                        std::span<const SentenceEmbedding> tgt,
                                        const MiningConfig& config) {
    config.validate();
    if (src.empty() || tgt.empty()) throw DataError("mining needs non-empty pools");

    std::vector<ScoredPair> best(src.size());
    std::vector<double> col_best(tgt.size(), -std::numeric_limits<double>::infinity());
    std::vector<std::size_t> col_owner(tgt.size(), 0);

    for_each_normalized_band(src, tgt, config.scoring, [&](Eigen::Index row0, const Eigen::MatrixXd& rows) {
        for (Eigen::Index r = 0; r < rows.rows(); ++r) {
            const auto s = static_cast<std::size_t>(row0 + r);
            Eigen::Index arg = 0;
            double value = rows(r, 0);
            for (Eigen::Index c = 1; c < rows.cols(); ++c) {
                if (rows(r, c) > value) {
                    value = rows(r, c);
                    arg = c;
                }
            }
            best[s] = {s, static_cast<std::size_t>(arg), value};
            for (Eigen::Index c = 0; c < rows.cols(); ++c) {
                const auto t = static_cast<std::size_t>(c);
                if (rows(r, c) > col_best[t]) {
                    col_best[t] = rows(r, c);
                    col_owner[t] = s;
                }
            }
        }
    });

    if (config.rule == CandidateRule::BestPerSource) return best;
    std::vector<ScoredPair> mutual;
    for (const auto& p : best) {
        if (col_owner[p.tgt] == p.src) mutual.push_back(p);
    }
    return mutual;
}

std::vector<ScoredPair> apply_threshold(std::span<const ScoredPair> candidates, double threshold) {
    std::vector<ScoredPair> kept;
    for (const auto& p : candidates) {
        if (p.score >= threshold) kept.push_back(p);
    }
    return kept;
}

std::vector<ScoredPair> mine(std::span<const SentenceEmbedding> src,
                             std::span<const SentenceEmbedding> tgt, const MiningConfig& config) {
    if (!config.threshold) throw ConfigError("mine needs a fixed threshold (or sweep on dev gold)");
    const auto candidates = mine_candidates(src, tgt, config);
    return apply_threshold(candidates, *config.threshold);
}

Alignment to_alignment(std::span<const ScoredPair> pairs, std::span<const SentenceEmbedding> src,
                       std::span<const SentenceEmbedding> tgt) {
    Alignment out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) out.push_back({src[p.src].id, tgt[p.tgt].id});
    return out;
}

namespace {

struct Prf {
    double precision, recall, f1;
};

Prf prf(std::size_t true_positives, std::size_t predicted, std::size_t gold) {
    const double p = predicted == 0 ? (gold == 0 ? 1.0 : 0.0)
                                    : static_cast<double>(true_positives) / static_cast<double>(predicted);
    const double r = gold == 0 ? 1.0 : static_cast<double>(true_positives) / static_cast<double>(gold);
    const double f = p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
    return {p, r, f};
}

} // namespace

SweepResult sweep_threshold(std::span<const LabeledCandidate> candidates, std::size_t gold_count) {
    if (candidates.empty()) throw DataError("threshold sweep needs at least one candidate");
    std::vector<LabeledCandidate> sorted(candidates.begin(), candidates.end());
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const auto& a, const auto& b) { return a.score > b.score; });

    // Thresholds are visited from high to low, so ">=" keeps the lower
    // threshold on ties.
    const auto none = prf(0, 0, gold_count);
    SweepResult best{std::numeric_limits<double>::infinity(), none.precision, none.recall, none.f1};
    std::size_t accepted = 0, hits = 0;
    for (std::size_t i = 0; i < sorted.size();) {
        const double t = sorted[i].score;
        while (i < sorted.size() && sorted[i].score == t) {
            ++accepted;
            if (sorted[i].gold) ++hits;
            ++i;
        }
        const auto q = prf(hits, accepted, gold_count);
        if (q.f1 >= best.f1) best = {t, q.precision, q.recall, q.f1};
    }
    // -inf accepts everything, same counts as the lowest score.
    const auto all = prf(hits, accepted, gold_count);
    if (all.f1 >= best.f1) best = {-std::numeric_limits<double>::infinity(), all.precision, all.recall, all.f1};
    return best;
}

MiningReport f1_against_gold(const Alignment& predicted, const Alignment& gold) {
    const std::set<IdPair> gold_set(gold.begin(), gold.end());
    const std::set<IdPair> pred_set(predicted.begin(), predicted.end());
    std::size_t hits = 0;
    for (const auto& p : pred_set) hits += gold_set.count(p);
    const auto q = prf(hits, pred_set.size(), gold_set.size());
    MiningReport report;
    report.predicted = predicted;
    report.precision = q.precision;
    report.recall = q.recall;
    report.f1 = q.f1;
    return report;
}

std::vector<LabeledCandidate> label_candidates(std::span<const ScoredPair> candidates,
                                               std::span<const SentenceEmbedding> src,
                                               std::span<const SentenceEmbedding> tgt,
                                               const Alignment& gold) {
    const std::set<IdPair> gold_set(gold.begin(), gold.end());
    std::vector<LabeledCandidate> out;
    out.reserve(candidates.size());
    for (const auto& c : candidates) {
        out.push_back({c.score, gold_set.contains(IdPair{src[c.src].id, tgt[c.tgt].id})});
    }
    return out;
}

} // namespace aligner
