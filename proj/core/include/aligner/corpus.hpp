#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace aligner {

struct BitextPair {
    std::string id;
    std::string src;
    std::string tgt;
    std::string pair_label;
    // Subword counts from the embedding producer's manifest, when known.
    std::optional<std::size_t> src_tokens;
    std::optional<std::size_t> tgt_tokens;

    friend bool operator==(const BitextPair&, const BitextPair&) = default;
};

struct BitextCorpus {
    std::vector<BitextPair> pairs;

    std::size_t size() const { return pairs.size(); }
    friend bool operator==(const BitextCorpus&, const BitextCorpus&) = default;
};

// Pair labels are "xx-yy": two non-empty codes of [A-Za-z0-9_] joined by
// a single '-'.
bool is_valid_pair_label(std::string_view label);

struct BudgetSpec {
    std::uint64_t total_budget = 1'000'000;
    std::vector<std::string> pair_labels; // descending resource rank
    std::size_t min_tokens = 5;
    std::uint64_t seed = 0;

    void validate() const; // ConfigError
};

/// Per-pair quotas for a fixed total budget. Every pair starts at
/// floor(budget / k), capped at its size; whatever is left (shortfalls and
/// the division remainder) is dealt out one unit per pair per round, in
/// label order, to pairs that still have data.
std::vector<std::uint64_t> allocate_budget(std::span<const std::uint64_t> sizes,
                                           std::uint64_t budget);

// Uniform sampling without replacement inside each pair (kept in corpus
// order), pairs emitted in spec.pair_labels order. Throws ConfigError when
// there are no pairs and DataError when a listed label has no corpus.
BitextCorpus sample_budget(const std::map<std::string, BitextCorpus>& per_pair,
                           const BudgetSpec& spec);

enum class TokenCountFallback { None, Whitespace };

// Keeps pairs whose both sides have at least min_tokens tokens. Counts come
// from the pair; the whitespace fallback is only meant for synthetic data.
// Throws DataError when a count is missing and there is no fallback.
BitextCorpus filter_min_tokens(const BitextCorpus& corpus, std::size_t min_tokens,
                               TokenCountFallback fallback = TokenCountFallback::None);

std::size_t whitespace_token_count(std::string_view text);

// Trim and collapse internal whitespace runs to a single space.
std::string normalize_whitespace(std::string_view text);

struct DecontaminationResult {
    BitextCorpus corpus;
    std::size_t removed = 0;
};

// Drops a pair when either side, after whitespace normalization, equals any
// test sentence.
DecontaminationResult decontaminate(const BitextCorpus& corpus,
                                    const std::vector<std::vector<std::string>>& test_sets);

// The k largest pairs (ties broken lexicographically), largest first.
BudgetSpec plan_topk(const std::map<std::string, std::uint64_t>& pair_sizes, int k,
                     std::uint64_t budget);

// ---- I/O ---------------------------------------------------------------
// Bitext TSV: "id<TAB>src_text<TAB>tgt_text" per line.
// Manifest JSONL: {"id": ..., "src_tokens": n, "tgt_tokens": m} per line.

BitextCorpus read_bitext_tsv(std::istream& in, const std::string& pair_label);
void write_bitext_tsv(const BitextCorpus& corpus, std::ostream& out);
// Attaches token counts by id. Unknown ids are ignored.
void attach_token_counts(BitextCorpus& corpus, std::istream& manifest_jsonl);

// Every "<label>.tsv" in dir, with "<label>.jsonl" manifests when present.
std::map<std::string, BitextCorpus> read_pairs_dir(const std::filesystem::path& dir);

// Test sets from a directory: "*.tsv" files are bitext (both sides count),
// any other regular file is one sentence per line.
std::vector<std::vector<std::string>> read_test_sets_dir(const std::filesystem::path& dir);

} // namespace aligner
