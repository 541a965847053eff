#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace aligner {

class TokenEmbeddingSet;

// Source-id -> target-id pairs. Used for gold alignments and for mined
// predictions; on disk both are UTF-8 TSV, "src_id<TAB>tgt_id" per line.
struct IdPair {
    std::string src;
    std::string tgt;

    friend bool operator==(const IdPair&, const IdPair&) = default;
    friend auto operator<=>(const IdPair&, const IdPair&) = default;
};

using Alignment = std::vector<IdPair>;

Alignment read_alignment_tsv(std::istream& in);
Alignment read_alignment_tsv(const std::filesystem::path& path);
void write_alignment_tsv(const Alignment& pairs, std::ostream& out);

// Resolves a bijective gold alignment against two sets with equal pool
// sizes: result[i] is the target index of source i. Throws DataError on
// unknown ids, size mismatch, or a non-bijective map.
std::vector<std::size_t> gold_target_indices(const Alignment& gold, const TokenEmbeddingSet& src,
                                             const TokenEmbeddingSet& tgt);

} // namespace aligner
