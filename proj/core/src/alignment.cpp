#include "aligner/alignment.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "aligner/embedding_store.hpp"
#include "aligner/error.hpp"

namespace aligner {

Alignment read_alignment_tsv(std::istream& in) {
    Alignment pairs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
            throw DataError("alignment line " + std::to_string(line_no) +
                            ": expected src_id<TAB>tgt_id");
        }
        pairs.push_back({line.substr(0, tab), line.substr(tab + 1)});
    }
    return pairs;
}

Alignment read_alignment_tsv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    return read_alignment_tsv(in);
}

void write_alignment_tsv(const Alignment& pairs, std::ostream& out) {
    for (const auto& p : pairs) out << p.src << '\t' << p.tgt << '\n';
}

std::vector<std::size_t> gold_target_indices(const Alignment& gold, const TokenEmbeddingSet& src,
                                             const TokenEmbeddingSet& tgt) {
    if (src.size() != tgt.size()) {
        throw DataError("pool size mismatch: " + std::to_string(src.size()) + " sources vs " +
                        std::to_string(tgt.size()) + " targets");
    }
    if (gold.size() != src.size()) {
        throw DataError("gold map has " + std::to_string(gold.size()) + " pairs for a pool of " +
                        std::to_string(src.size()));
    }
    constexpr auto unset = static_cast<std::size_t>(-1);
    std::vector<std::size_t> result(src.size(), unset);
    std::unordered_set<std::size_t> used_targets;
    for (const auto& p : gold) {
        const auto s = src.find(p.src);
        const auto t = tgt.find(p.tgt);
        if (!s) throw DataError("gold source id '" + p.src + "' not in source set");
        if (!t) throw DataError("gold target id '" + p.tgt + "' not in target set");
        if (result[*s] != unset) throw DataError("gold map is not bijective: '" + p.src + "' repeats");
        if (!used_targets.insert(*t).second) {
            throw DataError("gold map is not bijective: '" + p.tgt + "' repeats");
        }
        result[*s] = *t;
    }
    return result;
}

} // namespace aligner
