#include "aligner/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "aligner/error.hpp"

namespace aligner {

namespace {

bool is_code_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::mt19937_64 pair_stream(std::uint64_t seed, std::size_t pair_index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(pair_index)};
    return std::mt19937_64(seq);
}

} // namespace

bool is_valid_pair_label(std::string_view label) {
    const auto dash = label.find('-');
    if (dash == std::string_view::npos || dash == 0 || dash + 1 == label.size()) return false;
    const auto left = label.substr(0, dash);
    const auto right = label.substr(dash + 1);
    return std::all_of(left.begin(), left.end(), is_code_char) &&
           std::all_of(right.begin(), right.end(), is_code_char);
}

void BudgetSpec::validate() const {
    if (total_budget < 1) throw ConfigError("total_budget must be >= 1");
    if (pair_labels.empty()) throw ConfigError("budget spec lists no language pairs");
    std::unordered_set<std::string> seen;
    for (const auto& label : pair_labels) {
        if (!is_valid_pair_label(label)) throw ConfigError("malformed pair label '" + label + "'");
        if (!seen.insert(label).second) throw ConfigError("duplicate pair label '" + label + "'");
    }
}

std::vector<std::uint64_t> allocate_budget(std::span<const std::uint64_t> sizes,
                                           std::uint64_t budget) {
    const std::size_t k = sizes.size();
    std::vector<std::uint64_t> quota(k, 0);
    if (k == 0) return quota;
    const std::uint64_t base = budget / k;
    std::uint64_t left = budget;
    for (std::size_t i = 0; i < k; ++i) {
        quota[i] = std::min(base, sizes[i]);
        left -= quota[i];
    }
    // Round-robin: one unit per pair with spare data per round.
    while (left > 0) {
        std::uint64_t capacity = 0;
        for (std::size_t i = 0; i < k; ++i) capacity += sizes[i] - quota[i];
        if (capacity == 0) break;
        if (capacity <= left) {
            for (std::size_t i = 0; i < k; ++i) quota[i] = sizes[i];
            break;
        }
        // Whole rounds first, then a partial round in label order.
        std::size_t open = 0;
        std::uint64_t smallest_gap = std::numeric_limits<std::uint64_t>::max();
        for (std::size_t i = 0; i < k; ++i) {
            if (quota[i] < sizes[i]) {
                ++open;
                smallest_gap = std::min(smallest_gap, sizes[i] - quota[i]);
            }
        }
        const std::uint64_t rounds = std::min(left / open, smallest_gap);
        if (rounds > 0) {
            for (std::size_t i = 0; i < k; ++i) {
                if (quota[i] < sizes[i]) quota[i] += rounds;
            }
            left -= rounds * open;
            continue;
        }
        for (std::size_t i = 0; i < k && left > 0; ++i) {
            if (quota[i] < sizes[i]) {
                ++quota[i];
                --left;
            }
        }
    }
    return quota;
}

BitextCorpus sample_budget(const std::map<std::string, BitextCorpus>& per_pair,
                           const BudgetSpec& spec) {
    if (per_pair.empty()) throw ConfigError("no language pairs to sample from");
    spec.validate();

    std::vector<std::uint64_t> sizes;
    for (const auto& label : spec.pair_labels) {
        auto it = per_pair.find(label);
        if (it == per_pair.end()) throw DataError("no corpus for pair '" + label + "'");
        sizes.push_back(it->second.size());
    }
    const auto quota = allocate_budget(sizes, spec.total_budget);

    BitextCorpus out;
    for (std::size_t p = 0; p < spec.pair_labels.size(); ++p) {
        const auto& pairs = per_pair.at(spec.pair_labels[p]).pairs;
        std::vector<std::size_t> indices(pairs.size());
        std::iota(indices.begin(), indices.end(), 0);
        std::vector<std::size_t> chosen;
        chosen.reserve(quota[p]);
        auto rng = pair_stream(spec.seed, p);
        // std::sample over forward iterators is selection sampling, so the
        // chosen indices stay in corpus order.
        std::sample(indices.begin(), indices.end(), std::back_inserter(chosen),
                    static_cast<std::ptrdiff_t>(quota[p]), rng);
        for (auto i : chosen) {
            auto pair = pairs[i];
            pair.pair_label = spec.pair_labels[p];
            out.pairs.push_back(std::move(pair));
        }
    }
    return out;
}

std::size_t whitespace_token_count(std::string_view text) {
    std::size_t count = 0;
    bool in_token = false;
    for (char c : text) {
        if (is_space(c)) {
            in_token = false;
        } else if (!in_token) {
            in_token = true;
            ++count;
        }
    }
    return count;
}

BitextCorpus filter_min_tokens(const BitextCorpus& corpus, std::size_t min_tokens,
                               TokenCountFallback fallback) {
    const auto count = [&](const std::optional<std::size_t>& known, const std::string& text,
                           const std::string& id) -> std::size_t {
        if (known) return *known;
        if (fallback == TokenCountFallback::Whitespace) return whitespace_token_count(text);
        throw DataError("no token count for pair '" + id +
                        "' and no fallback counter configured");
    };
    BitextCorpus out;
    for (const auto& p : corpus.pairs) {
        if (count(p.src_tokens, p.src, p.id) >= min_tokens &&
            count(p.tgt_tokens, p.tgt, p.id) >= min_tokens) {
            out.pairs.push_back(p);
        }
    }
    return out;
}

std::string normalize_whitespace(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (char c : text) {
        if (is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(c);
    }
    return out;
}

DecontaminationResult decontaminate(const BitextCorpus& corpus,
                                    const std::vector<std::vector<std::string>>& test_sets) {
    std::unordered_set<std::string> banned;
    for (const auto& set : test_sets) {
        for (const auto& sentence : set) banned.insert(normalize_whitespace(sentence));
    }
    DecontaminationResult result;
    for (const auto& p : corpus.pairs) {
        if (banned.contains(normalize_whitespace(p.src)) ||
            banned.contains(normalize_whitespace(p.tgt))) {
            ++result.removed;
        } else {
            result.corpus.pairs.push_back(p);
        }
    }
    return result;
}

BudgetSpec plan_topk(const std::map<std::string, std::uint64_t>& pair_sizes, int k,
                     std::uint64_t budget) {
    if (k <= 0) throw ConfigError("k must be positive");
    if (static_cast<std::size_t>(k) > pair_sizes.size()) {
        throw ConfigError("k = " + std::to_string(k) + " exceeds the " +
                          std::to_string(pair_sizes.size()) + " available pairs");
    }
    std::vector<std::pair<std::string, std::uint64_t>> ranked(pair_sizes.begin(), pair_sizes.end());
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    BudgetSpec spec;
    spec.total_budget = budget;
    for (int i = 0; i < k; ++i) spec.pair_labels.push_back(ranked[static_cast<std::size_t>(i)].first);
    return spec;
}

BitextCorpus read_bitext_tsv(std::istream& in, const std::string& pair_label) {
    if (!is_valid_pair_label(pair_label)) throw DataError("malformed pair label '" + pair_label + "'");
    BitextCorpus corpus;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto t1 = line.find('\t');
        const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
        if (t2 == std::string::npos || line.find('\t', t2 + 1) != std::string::npos) {
            throw DataError(pair_label + " line " + std::to_string(line_no) +
                            ": expected id<TAB>src<TAB>tgt");
        }
        BitextPair p;
        p.id = line.substr(0, t1);
        p.src = line.substr(t1 + 1, t2 - t1 - 1);
        p.tgt = line.substr(t2 + 1);
        p.pair_label = pair_label;
        if (p.src.empty() || p.tgt.empty()) {
            throw DataError(pair_label + " line " + std::to_string(line_no) + ": empty text");
        }
        corpus.pairs.push_back(std::move(p));
    }
    return corpus;
}

void write_bitext_tsv(const BitextCorpus& corpus, std::ostream& out) {
    for (const auto& p : corpus.pairs) out << p.id << '\t' << p.src << '\t' << p.tgt << '\n';
}

void attach_token_counts(BitextCorpus& corpus, std::istream& manifest_jsonl) {
    std::unordered_map<std::string, std::pair<std::size_t, std::size_t>> counts;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(manifest_jsonl, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            counts[j.at("id").get<std::string>()] = {j.at("src_tokens").get<std::size_t>(),
                                                     j.at("tgt_tokens").get<std::size_t>()};
        } catch (const nlohmann::json::exception& e) {
            throw DataError("manifest line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    for (auto& p : corpus.pairs) {
        if (auto it = counts.find(p.id); it != counts.end()) {
            p.src_tokens = it->second.first;
            p.tgt_tokens = it->second.second;
        }
    }
}

std::map<std::string, BitextCorpus> read_pairs_dir(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw DataError(dir.string() + " is not a directory");
    std::map<std::string, BitextCorpus> out;
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".tsv") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& path : files) {
        const std::string label = path.stem().string();
        std::ifstream in(path);
        auto corpus = read_bitext_tsv(in, label);
        auto manifest = path;
        manifest.replace_extension(".jsonl");
        if (std::filesystem::exists(manifest)) {
            std::ifstream min(manifest);
            attach_token_counts(corpus, min);
        }
        out.emplace(label, std::move(corpus));
    }
    if (out.empty()) throw DataError("no <pair>.tsv files in " + dir.string());
    return out;
}

std::vector<std::vector<std::string>> read_test_sets_dir(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw DataError(dir.string() + " is not a directory");
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<std::vector<std::string>> sets;
    for (const auto& path : files) {
        std::ifstream in(path);
        std::vector<std::string> sentences;
        std::string line;
        const bool bitext = path.extension() == ".tsv";
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            if (!bitext) {
                sentences.push_back(line);
                continue;
            }
            const auto t1 = line.find('\t');
            const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
            if (t2 == std::string::npos) {
                throw DataError(path.string() + ": expected id<TAB>src<TAB>tgt");
            }
            sentences.push_back(line.substr(t1 + 1, t2 - t1 - 1));
            sentences.push_back(line.substr(t2 + 1));
        }
        sets.push_back(std::move(sentences));
    }
    return sets;
}

} // namespace aligner
