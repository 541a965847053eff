#include "aligner/embedding_store.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>
#include "log.hpp"

#include "aligner/error.hpp"
#include "binary_io.hpp"

namespace aligner {

namespace {

bool all_finite(const TokenMatrix& m) { return m.allFinite(); }

void check_entry(const SentenceEmbedding& s, std::size_t dim) {
    if (s.matrix.rows() == 0) {
        throw DataError("sentence '" + s.id + "' has no tokens");
    }
    if (s.dim() != dim) {
        throw DataError("sentence '" + s.id + "' has " + std::to_string(s.dim()) +
                        " columns, set dim is " + std::to_string(dim));
    }
    if (!all_finite(s.matrix)) {
        throw DataError("sentence '" + s.id + "' contains non-finite values");
    }
}

} // namespace

TokenEmbeddingSet::TokenEmbeddingSet(std::size_t dim, std::string language, std::string provenance)
    : dim_(dim), language_(std::move(language)), provenance_(std::move(provenance)) {
    if (dim == 0) throw DataError("embedding dim must be positive");
}

void TokenEmbeddingSet::add(SentenceEmbedding sentence) {
    if (dim_ == 0) throw DataError("embedding set has no dim");
    check_entry(sentence, dim_);
    if (index_.contains(sentence.id)) {
        throw DataError("duplicate sentence id '" + sentence.id + "'");
    }
    index_.emplace(sentence.id, entries_.size());
    entries_.push_back(std::move(sentence));
}

std::optional<std::size_t> TokenEmbeddingSet::find(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

void TokenEmbeddingSet::validate(std::size_t max_seq_len) const {
    if (dim_ == 0) throw DataError("embedding dim must be positive");
    if (dim_ > std::numeric_limits<std::uint32_t>::max()) throw DataError("embedding dim too large");
    for (const auto& s : entries_) {
        check_entry(s, dim_);
        if (s.token_count() > max_seq_len) {
            throw DataError("sentence '" + s.id + "' has " + std::to_string(s.token_count()) +
                            " tokens, max is " + std::to_string(max_seq_len));
        }
        if (s.id.size() > std::numeric_limits<std::uint16_t>::max()) {
            throw DataError("sentence id longer than 65535 bytes");
        }
    }
}

std::uint64_t write_embedding_set(const TokenEmbeddingSet& set, std::ostream& out,
                                  std::size_t max_seq_len) {
    set.validate(max_seq_len);

    std::uint64_t bytes = 0;
    out.write(kTembMagic, sizeof(kTembMagic));
    detail::put_le(out, kTembVersion);
    detail::put_le(out, kTembDtypeF32);
    detail::put_le(out, static_cast<std::uint32_t>(set.dim()));
    detail::put_le(out, static_cast<std::uint64_t>(set.size()));
    bytes += kTembHeaderBytes;

    std::vector<char> payload;
    for (const auto& s : set.entries()) {
        detail::put_le(out, static_cast<std::uint16_t>(s.id.size()));
        out.write(s.id.data(), static_cast<std::streamsize>(s.id.size()));
        detail::put_le(out, static_cast<std::uint32_t>(s.token_count()));

        const std::size_t values = s.token_count() * s.dim();
        payload.resize(values * 4);
        const float* data = s.matrix.data();
        for (std::size_t v = 0; v < values; ++v) {
            const auto bits = std::bit_cast<std::uint32_t>(data[v]);
            payload[4 * v + 0] = static_cast<char>(bits & 0xFFu);
            payload[4 * v + 1] = static_cast<char>((bits >> 8) & 0xFFu);
            payload[4 * v + 2] = static_cast<char>((bits >> 16) & 0xFFu);
            payload[4 * v + 3] = static_cast<char>((bits >> 24) & 0xFFu);
        }
        out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
        bytes += 2 + s.id.size() + 4 + payload.size();
    }
    if (!out) throw DataError("I/O failure while writing embedding set");
    return bytes;
}

TokenEmbeddingSet read_embedding_set(std::istream& in, const ReadOptions& options) {
    char magic[4] = {};
    if (!in.read(magic, 4)) throw FormatError("truncated header");
    if (std::memcmp(magic, kTembMagic, 4) != 0) throw FormatError("bad magic");

    std::uint16_t version = 0;
    std::uint8_t dtype = 0;
    std::uint32_t dim = 0;
    std::uint64_t count = 0;
    if (!detail::get_le(in, version)) throw FormatError("truncated header");
    if (version != kTembVersion) {
        throw FormatError("unsupported version " + std::to_string(version));
    }
    if (!detail::get_le(in, dtype) || !detail::get_le(in, dim) || !detail::get_le(in, count)) {
        throw FormatError("truncated header");
    }
    if (dtype != kTembDtypeF32) throw FormatError("unsupported dtype " + std::to_string(dtype));
    if (dim == 0) throw FormatError("zero embedding dim");

    TokenEmbeddingSet set(dim);
    std::vector<unsigned char> payload;
    std::size_t truncated = 0;
    for (std::uint64_t r = 0; r < count; ++r) {
        const auto truncated_record = [r] {
            return FormatError("truncated record " + std::to_string(r));
        };
        std::uint16_t id_len = 0;
        if (!detail::get_le(in, id_len)) throw truncated_record();
        std::string id(id_len, '\0');
        if (id_len > 0 && !in.read(id.data(), id_len)) throw truncated_record();
        std::uint32_t tokens = 0;
        if (!detail::get_le(in, tokens)) throw truncated_record();
        if (tokens == 0) throw FormatError("record " + std::to_string(r) + " has no tokens");

        const std::size_t values = static_cast<std::size_t>(tokens) * dim;
        payload.resize(values * 4);
        if (!in.read(reinterpret_cast<char*>(payload.data()),
                     static_cast<std::streamsize>(payload.size()))) {
            throw truncated_record();
        }

        const std::size_t kept = std::min<std::size_t>(tokens, options.max_seq_len);
        if (kept < tokens) ++truncated;
        SentenceEmbedding s{std::move(id), TokenMatrix(static_cast<Eigen::Index>(kept), dim)};
        float* dst = s.matrix.data();
        for (std::size_t v = 0; v < kept * dim; ++v) {
            dst[v] = detail::f32_from_le(payload.data() + 4 * v);
        }
        if (!s.matrix.allFinite()) {
            throw FormatError("non-finite value in record " + std::to_string(r));
        }
        set.add(std::move(s));
    }
    if (truncated > 0) {
        detail::log().warn("truncated {} sentence(s) to {} tokens", truncated, options.max_seq_len);
    }
    return set;
}

void write_sidecar(const std::vector<SentenceRecord>& records, std::ostream& out) {
    for (const auto& r : records) {
        nlohmann::ordered_json j;
        j["id"] = r.id;
        j["lang"] = r.lang;
        if (r.text) j["text"] = *r.text;
        if (r.tokens) j["tokens"] = *r.tokens;
        out << j.dump() << '\n';
    }
}

std::vector<SentenceRecord> read_sidecar(std::istream& in) {
    std::vector<SentenceRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            SentenceRecord r;
            r.id = j.at("id").get<std::string>();
            r.lang = j.value("lang", std::string{});
            if (j.contains("text") && j["text"].is_string()) r.text = j["text"].get<std::string>();
            if (j.contains("tokens") && j["tokens"].is_number_unsigned()) {
                r.tokens = j["tokens"].get<std::size_t>();
            }
            records.push_back(std::move(r));
        } catch (const nlohmann::json::exception& e) {
            throw DataError("sidecar line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return records;
}

std::filesystem::path sidecar_path(const std::filesystem::path& container) {
    auto p = container;
    p += ".jsonl";
    return p;
}

std::uint64_t save_embedding_set(const TokenEmbeddingSet& set, const std::filesystem::path& path) {
    set.validate();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    const auto bytes = write_embedding_set(set, out);

    std::vector<SentenceRecord> records;
    records.reserve(set.size());
    for (const auto& s : set.entries()) records.push_back({s.id, set.language(), {}, {}});
    std::ofstream side(sidecar_path(path), std::ios::trunc);
    if (!side) throw DataError("cannot open sidecar for " + path.string());
    write_sidecar(records, side);
    return bytes;
}

TokenEmbeddingSet load_embedding_set(const std::filesystem::path& path, const ReadOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    TokenEmbeddingSet set = [&] {
        try {
            return read_embedding_set(in, options);
        } catch (const FormatError& e) {
            throw FormatError(path.string() + ": " + e.what());
        }
    }();

    const auto side = sidecar_path(path);
    if (std::filesystem::exists(side)) {
        std::ifstream sin(side);
        const auto records = read_sidecar(sin);
        std::string lang;
        for (const auto& r : records) {
            if (r.lang.empty()) continue;
            if (!lang.empty() && lang != r.lang) {
                throw DataError(side.string() + ": mixed languages '" + lang + "' and '" + r.lang +
                                "'");
            }
            lang = r.lang;
        }
        set.set_language(lang);
    }
    set.set_provenance(path.filename().string());
    return set;
}

} // namespace aligner
