#include <algorithm>
#include <iterator>

#include <nlohmann/json.hpp>

#include "aligner/error.hpp"
#include "aligner/synthetic.hpp"

namespace aligner {

namespace {

SyntheticCorpusSpec from_object(const nlohmann::json& j, SyntheticCorpusSpec spec) {
    if (j.is_string()) {
        const auto name = j.get<std::string>();
        if (name == "default") return default_synthetic_spec();
        if (name == "popularity") return popularity_fixture_spec();
        throw ConfigError("unknown synthetic fixture '" + name + "'");
    }
    if (!j.is_object()) throw ConfigError("synthetic spec must be a JSON object");
    static const char* known[] = {"fixture", "num_pairs", "dim", "semantic_dim", "min_tokens",
                                  "max_tokens", "seed", "rotation_seed", "noise_sigma",
                                  "language_signal", "hub_bias", "popularity_fraction",
                                  "popularity_offset", "src_lang", "tgt_lang", "id_prefix"};
    for (const auto& item : j.items()) {
        if (std::find(std::begin(known), std::end(known), item.key()) == std::end(known)) {
            throw ConfigError("synthetic spec: unknown key '" + item.key() + "'");
        }
    }
    if (j.contains("fixture")) spec = from_object(j["fixture"], spec);
    const auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
    };
    get("num_pairs", spec.num_pairs);
    get("dim", spec.dim);
    get("semantic_dim", spec.semantic_dim);
    get("min_tokens", spec.min_tokens);
    get("max_tokens", spec.max_tokens);
    get("seed", spec.seed);
    get("rotation_seed", spec.rotation_seed);
    get("noise_sigma", spec.noise_sigma);
    get("language_signal", spec.language_signal);
    get("hub_bias", spec.hub_bias);
    get("popularity_fraction", spec.popularity_fraction);
    get("popularity_offset", spec.popularity_offset);
    get("src_lang", spec.src_lang);
    get("tgt_lang", spec.tgt_lang);
    get("id_prefix", spec.id_prefix);
    spec.validate();
    return spec;
}

} // namespace

SyntheticCorpusSpec synthetic_spec_from_json(const std::string& text, const SyntheticCorpusSpec& base) {
    try {
        return from_object(nlohmann::json::parse(text), base);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("synthetic spec: ") + e.what());
    }
}

std::string synthetic_spec_to_json(const SyntheticCorpusSpec& spec) {
    nlohmann::ordered_json j;
    j["num_pairs"] = spec.num_pairs;
    j["dim"] = spec.dim;
    j["semantic_dim"] = spec.semantic_dim;
    j["min_tokens"] = spec.min_tokens;
    j["max_tokens"] = spec.max_tokens;
    j["seed"] = spec.seed;
    j["rotation_seed"] = spec.rotation_seed;
    j["noise_sigma"] = spec.noise_sigma;
    j["language_signal"] = spec.language_signal;
    j["hub_bias"] = spec.hub_bias;
    j["popularity_fraction"] = spec.popularity_fraction;
    j["popularity_offset"] = spec.popularity_offset;
    j["src_lang"] = spec.src_lang;
    j["tgt_lang"] = spec.tgt_lang;
    j["id_prefix"] = spec.id_prefix;
    return j.dump();
}

} // namespace aligner
