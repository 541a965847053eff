#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace aligner {

// One row per token, `dim` columns. Stored as f32, which is also the
// on-disk scalar; scoring promotes to double.
using TokenMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr std::size_t kDefaultMaxSeqLen = 100;

struct SentenceEmbedding {
    std::string id;
    TokenMatrix matrix;

    std::size_t token_count() const { return static_cast<std::size_t>(matrix.rows()); }
    std::size_t dim() const { return static_cast<std::size_t>(matrix.cols()); }

    friend bool operator==(const SentenceEmbedding& a, const SentenceEmbedding& b) {
        return a.id == b.id && a.matrix.rows() == b.matrix.rows() &&
               a.matrix.cols() == b.matrix.cols() && a.matrix == b.matrix;
    }
};

/// An ordered collection of per-sentence token matrices that share one
/// embedding width and one language tag.
///
/// The set enforces its invariants on insertion: every matrix has exactly
/// `dim` columns and at least one row, all values are finite, and ids are
/// unique. The max sequence length is a reader/writer policy and is checked
/// by `validate`.
class TokenEmbeddingSet {
public:
    TokenEmbeddingSet() = default;
    explicit TokenEmbeddingSet(std::size_t dim, std::string language = {},
                               std::string provenance = {});

    // Throws DataError on any invariant violation; the set is unchanged then.
    void add(SentenceEmbedding sentence);

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    const std::vector<SentenceEmbedding>& entries() const { return entries_; }
    const SentenceEmbedding& operator[](std::size_t i) const { return entries_[i]; }

    const std::string& language() const { return language_; }
    const std::string& provenance() const { return provenance_; }
    void set_language(std::string language) { language_ = std::move(language); }
    void set_provenance(std::string provenance) { provenance_ = std::move(provenance); }

    std::optional<std::size_t> find(std::string_view id) const;

    // Re-checks every invariant, including token_count <= max_seq_len.
    void validate(std::size_t max_seq_len = kDefaultMaxSeqLen) const;

    // Equality covers dim and entries; language and provenance live in the
    // sidecar, not in the container, so they are not compared.
    friend bool operator==(const TokenEmbeddingSet& a, const TokenEmbeddingSet& b) {
        return a.dim_ == b.dim_ && a.entries_ == b.entries_;
    }

private:
    std::size_t dim_ = 0;
    std::string language_;
    std::string provenance_;
    std::vector<SentenceEmbedding> entries_;
    std::unordered_map<std::string, std::size_t> index_;
};

// ---- TEMB container ----------------------------------------------------
//
//   magic "TEMB" | version u16 = 1 | dtype u8 (1 = f32) | dim u32 | count u64
//   per record: id_len u16 | id bytes | token_count u32 | f32[token_count*dim]
//
// All integers and floats little-endian; matrices row-major.

inline constexpr char kTembMagic[4] = {'T', 'E', 'M', 'B'};
inline constexpr std::uint16_t kTembVersion = 1;
inline constexpr std::uint8_t kTembDtypeF32 = 1;
inline constexpr std::size_t kTembHeaderBytes = 4 + 2 + 1 + 4 + 8;

struct ReadOptions {
    // Records longer than this are truncated with a warning.
    std::size_t max_seq_len = kDefaultMaxSeqLen;
};

// Validates the whole set before the first byte is written. Returns the
// number of bytes emitted.
std::uint64_t write_embedding_set(const TokenEmbeddingSet& set, std::ostream& out,
                                  std::size_t max_seq_len = kDefaultMaxSeqLen);

// Errors (FormatError): "bad magic", "unsupported version", "unsupported
// dtype", "truncated header", "truncated record <i>", "non-finite value in
// record <i>", plus DataError for duplicate ids / empty records.
TokenEmbeddingSet read_embedding_set(std::istream& in, const ReadOptions& options = {});

// ---- sidecar manifest --------------------------------------------------
//
// One JSON object per line: {"id": ..., "lang": ..., "text": ...}; text is
// optional. Producers may add extra keys (e.g. "tokens"); they are kept.

struct SentenceRecord {
    std::string id;
    std::string lang;
    std::optional<std::string> text;
    std::optional<std::size_t> tokens;
};

void write_sidecar(const std::vector<SentenceRecord>& records, std::ostream& out);
std::vector<SentenceRecord> read_sidecar(std::istream& in);

// Sidecar path convention: "<container path>.jsonl".
std::filesystem::path sidecar_path(const std::filesystem::path& container);

// File helpers. save writes the container plus a sidecar carrying
// id + language for every entry. load reads the sidecar when present and
// takes the set's language from it.
std::uint64_t save_embedding_set(const TokenEmbeddingSet& set, const std::filesystem::path& path);
TokenEmbeddingSet load_embedding_set(const std::filesystem::path& path,
                                     const ReadOptions& options = {});

} // namespace aligner
