#include "cli.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "aligner/ablation.hpp"
#include "aligner/alignment.hpp"
#include "aligner/contrastive.hpp"
#include "aligner/corpus.hpp"
#include "aligner/embedding_store.hpp"
#include "aligner/error.hpp"
#include "aligner/mining.hpp"
#include "aligner/parallel.hpp"
#include "aligner/retrieval.hpp"
#include "aligner/scorer_params.hpp"
#include "aligner/synthetic.hpp"
#include "manifest.hpp"

#ifndef ALIGNER_VERSION
#define ALIGNER_VERSION "0.0.0"
#endif

namespace aligner::cli {

const char* version() { return ALIGNER_VERSION; }

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

// Every knob a command reads, with its default. null means "derived later".
json command_defaults(const std::string& command) {
    json d;
    const auto norm = [&](const char* scope) {
        d["alpha"] = 0.75;
        d["normalization"] = true;
        d["norm_scope"] = scope;
        d["tile_size"] = 256;
    };
    const auto scoring = [&] {
        d["pooling"] = "bert-score";
        d["mode"] = "eval-cosine";
    };
    if (command == "score") {
        norm("pool");
        scoring();
    } else if (command == "retrieve") {
        norm("pool");
        scoring();
        d["bidirectional"] = false;
        d["pair_label"] = nullptr;
    } else if (command == "mine") {
        norm("tile");
        scoring();
        d["rule"] = "best";
        d["threshold"] = nullptr;
        d["band_size"] = 0;
    } else if (command == "train") {
        norm("tile");
        d["tile_size"] = nullptr; // the batch
        d["epochs"] = 3;
        d["batch_size"] = 64;
        d["temperature"] = 5.0;
        d["learning_rate"] = 3e-6;
        d["seed"] = 0;
        d["mode"] = "train-dot";
        d["negatives"] = "global";
        d["out_dim"] = 0;
    } else if (command == "prepare-data") {
        d["seed"] = nullptr; // spec file's seed, or 0
        d["budget"] = 1000000;
        d["min_tokens"] = 5;
        d["top_k"] = nullptr;
        d["token_fallback"] = "none";
    }
    d["jobs"] = nullptr;
    return d;
}

const std::set<std::string>& all_config_keys() {
    static const std::set<std::string> keys = [] {
        std::set<std::string> k;
        for (const char* c : {"score", "retrieve", "mine", "train", "prepare-data", "ablate"}) {
            const json d = command_defaults(c);
            for (const auto& [key, _] : d.items()) k.insert(key);
        }
        return k;
    }();
    return keys;
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct Overrides {
    std::map<std::string, json> values; // from flags, keyed by config key
    std::map<std::string, std::string> flag_names;

    template <class T>
    CLI::Option* add(CLI::App* app, const std::string& flag, const std::string& key,
                     const std::string& help) {
        flag_names[key] = flag;
        return app->add_option_function<T>(
            flag, [this, key](const T& v) { values[key] = v; }, help);
    }
};

// defaults < config file < flags
json resolve_config(const std::string& command, const std::optional<std::string>& config_path,
                    const Overrides& overrides) {
    json cfg = command_defaults(command);
    if (config_path) {
        json file;
        try {
            file = json::parse(read_text(*config_path));
        } catch (const json::parse_error& e) {
            throw ConfigError(*config_path + ": " + e.what());
        }
        if (!file.is_object()) throw ConfigError(*config_path + ": config must be a JSON object");
        for (const auto& [key, value] : file.items()) {
            if (!all_config_keys().contains(key)) {
                throw ConfigError(*config_path + ": unknown key '" + key + "'");
            }
            // Keys that belong to other commands are ignored so one file can
            // serve a whole workflow.
            if (cfg.contains(key)) cfg[key] = value;
        }
    }
    for (const auto& [key, value] : overrides.values) {
        if (!cfg.contains(key)) {
            const auto it = overrides.flag_names.find(key);
            const std::string flag = it == overrides.flag_names.end() ? key : it->second;
            throw ConfigError(flag + " does not apply to " + command);
        }
        cfg[key] = value;
    }
    if (cfg["jobs"].is_null()) cfg["jobs"] = default_jobs();
    return cfg;
}

template <class T>
T get(const json& cfg, const char* key) {
    try {
        return cfg.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("config key '") + key + "' has the wrong type");
    }
}

NormalizationConfig norm_from(const json& cfg) {
    NormalizationConfig n;
    n.alpha = get<double>(cfg, "alpha");
    n.scope = parse_norm_scope(get<std::string>(cfg, "norm_scope"));
    n.tile_size = get<std::size_t>(cfg, "tile_size");
    n.enabled = get<bool>(cfg, "normalization");
    n.validate();
    return n;
}

ScoringOptions scoring_from(const json& cfg, const ScorerParams* params) {
    ScoringOptions o;
    o.mode = parse_score_mode(get<std::string>(cfg, "mode"));
    o.pooling = parse_pooling(get<std::string>(cfg, "pooling"));
    o.params = params;
    o.norm = norm_from(cfg);
    o.jobs = get<std::size_t>(cfg, "jobs");
    if (cfg.contains("band_size")) o.band_size = get<std::size_t>(cfg, "band_size");
    return o;
}

std::string format_threshold(double t) {
    if (std::isinf(t)) return t > 0 ? "inf" : "-inf";
    std::ostringstream s;
    s << std::setprecision(17) << t;
    return s.str();
}

// Inputs, outputs and anything a command wants to report in its manifest.
class Run {
public:
    std::ostringstream data; // flushed to stdout at the end
    json stats = json::object();

    void input(const fs::path& p) {
        for (auto& [k, v] : digest_path(p)) inputs_[k] = v;
    }
    void output(const fs::path& p) { outputs_.push_back(p); }
    void manifest_at(fs::path p) { manifest_ = std::move(p); }
    const std::optional<fs::path>& manifest() const { return manifest_; }

    json output_digests() const {
        json o = json::object();
        for (const auto& p : outputs_) {
            for (auto& [k, v] : digest_path(p)) o[k] = v;
        }
        if (!data.str().empty()) o["<stdout>"] = sha256_hex(data.str());
        return o;
    }
    json input_digests() const {
        json o = json::object();
        for (const auto& [k, v] : inputs_) o[k] = v;
        return o;
    }

private:
    std::map<std::string, std::string> inputs_;
    std::vector<fs::path> outputs_;
    std::optional<fs::path> manifest_;
};

std::optional<ScorerParams> load_params(Run& run, const std::optional<std::string>& path) {
    if (!path) return std::nullopt;
    run.input(*path);
    return load_checkpoint(*path);
}

TokenEmbeddingSet load_set(Run& run, const std::string& path) {
    run.input(path);
    if (fs::exists(sidecar_path(path))) run.input(sidecar_path(path));
    return load_embedding_set(path);
}

void write_file(const fs::path& path, const std::string& bytes) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    out << bytes;
    if (!out) throw DataError("write failed: " + path.string());
}

// --- subcommands ------------------------------------------------------------

struct Paths {
    std::string src, tgt, gold, out, params, grid, synthetic, pairs, decontaminate, init;
};

void cmd_score(Run& run, const json& cfg, const Paths& p, std::ostream&) {
    const auto src = load_set(run, p.src);
    const auto tgt = load_set(run, p.tgt);
    const auto params = load_params(run, p.params.empty() ? std::nullopt : std::optional(p.params));
    const auto opts = scoring_from(cfg, params ? &*params : nullptr);
    const auto scores = normalized_scores(src.entries(), tgt.entries(), opts);

    std::ostringstream text;
    text << std::fixed << std::setprecision(6);
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
        for (Eigen::Index j = 0; j < scores.cols(); ++j) text << (j ? "\t" : "") << scores(i, j);
        text << '\n';
    }
    if (p.out.empty()) {
        run.data << text.str();
    } else {
        write_file(p.out, text.str());
        run.output(p.out);
    }
}

std::string default_pair_label(const TokenEmbeddingSet& src, const TokenEmbeddingSet& tgt) {
    const std::string label = src.language() + "-" + tgt.language();
    return is_valid_pair_label(label) ? label : "src-tgt";
}

void cmd_retrieve(Run& run, json& cfg, const Paths& p, std::ostream& err) {
    RetrievalTask task{load_set(run, p.src), load_set(run, p.tgt), {}, {}};
    run.input(p.gold);
    task.gold = read_alignment_tsv(fs::path(p.gold));
    if (cfg["pair_label"].is_null()) cfg["pair_label"] = default_pair_label(task.src, task.tgt);
    task.pair_label = get<std::string>(cfg, "pair_label");
    if (!is_valid_pair_label(task.pair_label)) {
        throw ConfigError("pair label '" + task.pair_label + "' is not of the form xx-yy");
    }

    const auto params = load_params(run, p.params.empty() ? std::nullopt : std::optional(p.params));
    RetrievalOptions opts;
    opts.scoring = scoring_from(cfg, params ? &*params : nullptr);
    opts.bidirectional = get<bool>(cfg, "bidirectional");
    const auto result = evaluate_retrieval(task, opts);
    err << "retrieve " << task.pair_label << ": " << result.correct << "/" << result.total
        << " correct, " << result.ties << " tied rows\n";

    const auto report = aggregate({{task.pair_label, result.accuracy}},
                                  describe_settings(opts, p.params.empty() ? "identity" : p.params));
    const auto jsonl = report_to_jsonl(report, {{task.pair_label, result}});
    if (p.out.empty()) {
        run.data << jsonl;
    } else {
        write_file(p.out, jsonl);
        run.output(p.out);
    }
    run.data << render_report(report);
    run.stats["accuracy"] = result.accuracy;
}

void cmd_mine(Run& run, json& cfg, const Paths& p, bool sweep, std::ostream& err) {
    const auto src = load_set(run, p.src);
    const auto tgt = load_set(run, p.tgt);
    std::optional<Alignment> gold;
    if (!p.gold.empty()) {
        run.input(p.gold);
        gold = read_alignment_tsv(fs::path(p.gold));
    }
    if (!cfg["threshold"].is_null() && cfg["threshold"] == "sweep") sweep = true;
    if (sweep && !cfg["threshold"].is_null() && cfg["threshold"] != "sweep") {
        throw ConfigError("--sweep and --threshold are mutually exclusive");
    }
    if (sweep && !gold) throw ConfigError("--sweep needs --gold");
    if (!sweep && cfg["threshold"].is_null()) throw ConfigError("mine needs --threshold or --sweep");

    const auto params = load_params(run, p.params.empty() ? std::nullopt : std::optional(p.params));
    MiningConfig config;
    config.rule = parse_candidate_rule(get<std::string>(cfg, "rule"));
    config.scoring = scoring_from(cfg, params ? &*params : nullptr);
    const auto candidates = mine_candidates(src.entries(), tgt.entries(), config);

    double threshold = 0.0;
    if (sweep) {
        const auto labeled = label_candidates(candidates, src.entries(), tgt.entries(), *gold);
        threshold = sweep_threshold(labeled, gold->size()).threshold;
        cfg["threshold"] = "sweep";
    } else {
        threshold = get<double>(cfg, "threshold");
    }
    const auto kept = apply_threshold(candidates, threshold);
    const auto predicted = to_alignment(kept, src.entries(), tgt.entries());

    std::ostringstream tsv;
    write_alignment_tsv(predicted, tsv);
    if (p.out.empty()) {
        run.data << tsv.str();
    } else {
        write_file(p.out, tsv.str());
        run.output(p.out);
    }

    run.stats["chosen_threshold"] = format_threshold(threshold);
    run.stats["candidates"] = candidates.size();
    run.stats["predicted"] = predicted.size();
    err << "mine: " << predicted.size() << " pairs at threshold " << format_threshold(threshold)
        << " (" << to_string(config.rule) << ")\n";
    if (gold) {
        const auto report = f1_against_gold(predicted, *gold);
        run.stats["precision"] = report.precision;
        run.stats["recall"] = report.recall;
        run.stats["f1"] = report.f1;
        err << std::fixed << std::setprecision(4) << "precision " << report.precision << " recall "
            << report.recall << " f1 " << report.f1 << '\n';
    }
}

void cmd_train(Run& run, json& cfg, const Paths& p, std::ostream& err) {
    const auto src = load_set(run, p.src);
    const auto tgt = load_set(run, p.tgt);
    run.input(p.gold);
    const auto gold = read_alignment_tsv(fs::path(p.gold));

    TrainerConfig config;
    config.epochs = get<std::size_t>(cfg, "epochs");
    config.batch_size = get<std::size_t>(cfg, "batch_size");
    config.temperature = get<double>(cfg, "temperature");
    config.learning_rate = get<double>(cfg, "learning_rate");
    config.seed = get<std::uint64_t>(cfg, "seed");
    config.mode = parse_score_mode(get<std::string>(cfg, "mode"));
    config.negatives = parse_negative_scope(get<std::string>(cfg, "negatives"));
    config.out_dim = get<std::size_t>(cfg, "out_dim");
    config.jobs = get<std::size_t>(cfg, "jobs");
    if (cfg["tile_size"].is_null()) cfg["tile_size"] = config.batch_size;
    config.norm = norm_from(cfg);

    const auto init = load_params(run, p.init.empty() ? std::nullopt : std::optional(p.init));
    const auto result = train(src, tgt, gold, config, init);
    for (std::size_t e = 0; e < result.epoch_losses.size(); ++e) {
        err << "epoch " << e + 1 << " loss " << std::setprecision(6) << result.epoch_losses[e] << '\n';
    }
    if (fs::path(p.out).has_parent_path()) fs::create_directories(fs::path(p.out).parent_path());
    save_checkpoint(result.params, p.out);
    run.output(p.out);
    run.stats["epoch_losses"] = result.epoch_losses;
}

std::vector<fs::path> write_pairs_dir(const BitextCorpus& corpus, const fs::path& dir) {
    fs::create_directories(dir);
    std::vector<fs::path> written;
    std::map<std::string, BitextCorpus> by_label;
    for (const auto& pair : corpus.pairs) by_label[pair.pair_label].pairs.push_back(pair);
    for (const auto& [label, part] : by_label) {
        std::ostringstream tsv, counts;
        write_bitext_tsv(part, tsv);
        bool any_counts = false;
        for (const auto& pair : part.pairs) {
            if (!pair.src_tokens || !pair.tgt_tokens) continue;
            any_counts = true;
            json j;
            j["id"] = pair.id;
            j["src_tokens"] = *pair.src_tokens;
            j["tgt_tokens"] = *pair.tgt_tokens;
            counts << j.dump() << '\n';
        }
        write_file(dir / (label + ".tsv"), tsv.str());
        written.push_back(dir / (label + ".tsv"));
        if (any_counts) {
            write_file(dir / (label + ".jsonl"), counts.str());
            written.push_back(dir / (label + ".jsonl"));
        }
    }
    return written;
}

void cmd_prepare_synthetic(Run& run, json& cfg, const Paths& p, std::ostream& err) {
    run.input(p.synthetic);
    auto spec = synthetic_spec_from_json(read_text(p.synthetic));
    if (cfg["seed"].is_null()) cfg["seed"] = spec.seed;
    spec.seed = get<std::uint64_t>(cfg, "seed");
    cfg["synthetic"] = json::parse(synthetic_spec_to_json(spec));

    const auto data = generate_synthetic_pair(spec);
    const fs::path dir = p.out;
    fs::create_directories(dir);
    save_embedding_set(data.src, dir / "src.temb");
    save_embedding_set(data.tgt, dir / "tgt.temb");
    std::ostringstream gold;
    write_alignment_tsv(data.gold, gold);
    write_file(dir / "gold.tsv", gold.str());
    for (const char* name : {"src.temb", "src.temb.jsonl", "tgt.temb", "tgt.temb.jsonl", "gold.tsv"}) {
        run.output(dir / name);
    }
    run.stats["pairs"] = spec.num_pairs;
    run.stats["popular_targets"] = data.popular_targets.size();
    err << "prepare-data: " << spec.num_pairs << " synthetic pairs written to " << dir.string() << '\n';
}

void cmd_prepare_pairs(Run& run, json& cfg, const Paths& p, std::ostream& err) {
    if (cfg["seed"].is_null()) cfg["seed"] = 0;
    run.input(p.pairs);
    auto corpora = read_pairs_dir(p.pairs);

    std::map<std::string, std::uint64_t> sizes;
    for (const auto& [label, c] : corpora) sizes[label] = c.size();
    const auto budget = get<std::uint64_t>(cfg, "budget");
    BudgetSpec spec;
    if (!cfg["top_k"].is_null()) {
        spec = plan_topk(sizes, get<int>(cfg, "top_k"), budget);
    } else {
        spec.total_budget = budget;
        // Descending by size, ties by label, same order plan_topk uses.
        spec = plan_topk(sizes, static_cast<int>(sizes.size()), budget);
    }
    spec.min_tokens = get<std::size_t>(cfg, "min_tokens");
    spec.seed = get<std::uint64_t>(cfg, "seed");
    cfg["pair_labels"] = spec.pair_labels;

    const auto fallback_name = get<std::string>(cfg, "token_fallback");
    TokenCountFallback fallback;
    if (fallback_name == "none") {
        fallback = TokenCountFallback::None;
    } else if (fallback_name == "whitespace") {
        fallback = TokenCountFallback::Whitespace;
    } else {
        throw ConfigError("token_fallback must be none or whitespace");
    }

    const auto sampled = sample_budget(corpora, spec);
    const auto filtered = filter_min_tokens(sampled, spec.min_tokens, fallback);
    BitextCorpus final_corpus = filtered;
    std::size_t removed = 0;
    if (!p.decontaminate.empty()) {
        run.input(p.decontaminate);
        auto result = decontaminate(filtered, read_test_sets_dir(p.decontaminate));
        final_corpus = std::move(result.corpus);
        removed = result.removed;
    }
    for (const auto& path : write_pairs_dir(final_corpus, p.out)) run.output(path);

    run.stats["sampled"] = sampled.size();
    run.stats["short_removed"] = sampled.size() - filtered.size();
    run.stats["decontaminated"] = removed;
    run.stats["kept"] = final_corpus.size();
    err << "prepare-data: sampled " << sampled.size() << ", removed " << sampled.size() - filtered.size()
        << " short, " << removed << " contaminated, kept " << final_corpus.size() << '\n';
}

void cmd_ablate(Run& run, json& cfg, const Paths& p) {
    run.input(p.grid);
    const auto grid = load_grid(p.grid);
    for (const auto& task : grid.tasks) {
        if (const auto* files = std::get_if<FileTaskSource>(&task.source)) {
            run.input(files->src);
            run.input(files->tgt);
            run.input(files->gold);
        }
    }
    cfg["grid"] = json::parse(read_text(p.grid));
    const auto cells = run_grid(grid, get<std::size_t>(cfg, "jobs"));
    write_file(p.out, cells_to_jsonl(cells));
    run.output(p.out);
    run.data << render_grid(cells);
}

// --- manifest ----------------------------------------------------------------

void write_manifest(const Run& run, const std::string& command, const std::vector<std::string>& args,
                    const json& cfg) {
    if (!run.manifest()) return;
    json m;
    m["tool"] = "aligner";
    m["version"] = version();
    m["command"] = command;
    m["argv"] = args;
    m["cwd"] = fs::current_path().generic_string();
    m["config"] = cfg;
    m["inputs"] = run.input_digests();
    m["outputs"] = run.output_digests();
    m["stats"] = run.stats;
    write_file(*run.manifest(), m.dump(2) + "\n");
}

int rerun(const std::string& manifest_path, std::ostream& out, std::ostream& err);

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

class CwdGuard {
public:
    explicit CwdGuard(const fs::path& dir) : saved_(fs::current_path()) { fs::current_path(dir); }
    ~CwdGuard() {
        std::error_code ec;
        fs::current_path(saved_, ec);
    }

private:
    fs::path saved_;
};

int rerun(const std::string& manifest_path, std::ostream& out, std::ostream& err) {
    json old;
    try {
        old = json::parse(read_text(manifest_path));
    } catch (const json::parse_error& e) {
        throw DataError(manifest_path + ": " + e.what());
    }
    const auto args = old.at("argv").get<std::vector<std::string>>();
    if (!args.empty() && args.front() == "rerun") throw ConfigError("a manifest cannot point at rerun");
    CwdGuard cwd(old.at("cwd").get<std::string>());

    for (const auto& [path, digest] : old.at("inputs").items()) {
        if (!fs::exists(path) || sha256_file(path) != digest.get<std::string>()) {
            err << "rerun: input " << path << " changed since the recorded run\n";
            return kExitData;
        }
    }
    std::ostringstream captured;
    const int code = run_command(args, captured, err);
    out << captured.str();
    if (code != kExitOk) return code;

    std::size_t mismatched = 0;
    for (const auto& [path, digest] : old.at("outputs").items()) {
        const std::string now = path == "<stdout>" ? sha256_hex(captured.str())
                                : fs::exists(path) ? sha256_file(path)
                                                   : std::string("missing");
        if (now != digest.get<std::string>()) {
            err << "rerun: output " << path << " differs\n";
            ++mismatched;
        }
    }
    if (mismatched) return kExitData;
    err << "rerun: " << old.at("outputs").size() << " output(s) reproduced bit-identically\n";
    return kExitOk;
}

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Cross-lingual sentence alignment engine", "aligner"};
    app.set_version_flag("--version", std::string("aligner ") + version());
    app.require_subcommand(1);
    app.fallthrough();

    Overrides ov;
    std::optional<std::string> config_path;
    std::optional<std::string> manifest_path;
    bool no_norm = false;
    app.add_option("--config", config_path, "JSON config file (flags win over it)")->check(CLI::ExistingFile);
    app.add_option("--manifest", manifest_path, "where to write the run manifest");
    ov.add<double>(&app, "--alpha", "alpha", "normalization strength in [0, 1]");
    ov.add<std::string>(&app, "--norm-scope", "norm_scope", "pool or tile")
        ->check(CLI::IsMember({"pool", "tile"}));
    ov.add<std::size_t>(&app, "--tile-size", "tile_size", "tile edge for tile scope");
    app.add_flag("--no-norm", no_norm, "skip normalization (scores stay raw)");
    ov.add<double>(&app, "--temperature", "temperature", "softmax temperature (divides logits)");
    ov.add<std::uint64_t>(&app, "--seed", "seed", "seed for every random draw");
    ov.add<std::size_t>(&app, "--jobs", "jobs", "worker cap (default: ALIGNER_JOBS or all cores)")
        ->check(CLI::PositiveNumber);

    Paths p;
    bool sweep = false;
    std::string rerun_manifest;

    auto* score = app.add_subcommand("score", "print the normalized score matrix");
    score->add_option("--src", p.src, "source .temb")->required();
    score->add_option("--tgt", p.tgt, "target .temb")->required();
    score->add_option("--params", p.params, "scorer checkpoint");
    score->add_option("--out", p.out, "write the matrix here instead of stdout");
    ov.add<std::string>(score, "--pooling", "pooling", "bert-score or avg-pool");
    ov.add<std::string>(score, "--mode", "mode", "eval-cosine or train-dot");

    auto* retrieve = app.add_subcommand("retrieve", "ranking accuracy against gold");
    retrieve->add_option("--src", p.src, "source .temb")->required();
    retrieve->add_option("--tgt", p.tgt, "target .temb")->required();
    retrieve->add_option("--gold", p.gold, "gold TSV")->required();
    retrieve->add_option("--params", p.params, "scorer checkpoint");
    retrieve->add_option("--out", p.out, "JSONL report path (default stdout)");
    ov.add<std::string>(retrieve, "--pooling", "pooling", "bert-score or avg-pool");
    ov.add<std::string>(retrieve, "--pair-label", "pair_label", "xx-yy label for the report");
    retrieve->add_flag_function(
        "--bidirectional", [&](std::int64_t) { ov.values["bidirectional"] = true; },
        "average both directions");

    auto* mine = app.add_subcommand("mine", "threshold mining over normalized scores");
    mine->add_option("--src", p.src, "source .temb")->required();
    mine->add_option("--tgt", p.tgt, "target .temb")->required();
    mine->add_option("--gold", p.gold, "gold TSV (for --sweep and F1)");
    mine->add_option("--params", p.params, "scorer checkpoint");
    mine->add_option("--out", p.out, "predicted pairs TSV (default stdout)");
    auto* thr = ov.add<double>(mine, "--threshold", "threshold", "fixed decision threshold");
    auto* sw = mine->add_flag("--sweep", sweep, "choose the threshold that maximizes F1 on --gold");
    thr->excludes(sw);
    ov.add<std::string>(mine, "--rule", "rule", "best or mutual")->check(CLI::IsMember({"best", "mutual"}));
    ov.add<std::string>(mine, "--pooling", "pooling", "bert-score or avg-pool");
    ov.add<std::size_t>(mine, "--band-size", "band_size", "source rows scored at a time");

    auto* trainc = app.add_subcommand("train", "fit the projection scorer");
    trainc->add_option("--src", p.src, "source .temb")->required();
    trainc->add_option("--tgt", p.tgt, "target .temb")->required();
    trainc->add_option("--gold", p.gold, "gold TSV")->required();
    trainc->add_option("--out", p.out, "checkpoint path")->required();
    trainc->add_option("--init", p.init, "starting checkpoint (default identity)");
    ov.add<std::size_t>(trainc, "--epochs", "epochs", "passes over the data");
    ov.add<std::size_t>(trainc, "--batch-size", "batch_size", "pairs per batch");
    ov.add<double>(trainc, "--learning-rate", "learning_rate", "gradient step size");
    ov.add<std::size_t>(trainc, "--out-dim", "out_dim", "projection width (0 keeps the input dim)");
    ov.add<std::string>(trainc, "--negatives", "negatives", "global or row");

    auto* prep = app.add_subcommand("prepare-data", "synthetic pools or budgeted bitext");
    auto* syn = prep->add_option("--synthetic", p.synthetic, "synthetic spec JSON");
    auto* pairs = prep->add_option("--pairs", p.pairs, "directory of <xx-yy>.tsv files");
    syn->excludes(pairs);
    prep->add_option("--out", p.out, "output directory")->required();
    ov.add<std::uint64_t>(prep, "--budget", "budget", "total pairs kept");
    ov.add<std::size_t>(prep, "--min-tokens", "min_tokens", "drop pairs with fewer tokens on a side");
    prep->add_option("--decontaminate", p.decontaminate, "directory of test sets");
    ov.add<int>(prep, "--top-k", "top_k", "keep the k largest pairs");
    ov.add<std::string>(prep, "--token-fallback", "token_fallback", "none or whitespace");

    auto* ablate = app.add_subcommand("ablate", "pooling x normalization grid");
    ablate->add_option("--grid", p.grid, "grid JSON")->required();
    ablate->add_option("--out", p.out, "cell JSONL")->required();

    auto* rer = app.add_subcommand("rerun", "replay a manifest and compare output digests");
    rer->add_option("manifest", rerun_manifest, "manifest JSON")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }
    if (no_norm) ov.values["normalization"] = false;

    auto* sub = app.get_subcommands().front();
    const std::string command = sub->get_name();
    if (command == "rerun") return rerun(rerun_manifest, out, err);
    if (command == "prepare-data" && p.synthetic.empty() == p.pairs.empty()) {
        err << "prepare-data needs exactly one of --synthetic or --pairs\n" << prep->help();
        return kExitUsage;
    }

    json cfg = resolve_config(command, config_path, ov);
    Run run;
    if (config_path) run.input(*config_path);
    if (manifest_path) {
        run.manifest_at(*manifest_path);
    } else if (!p.out.empty()) {
        const bool dir_output = command == "prepare-data";
        run.manifest_at(dir_output ? fs::path(p.out) / "manifest.json" : fs::path(p.out + ".manifest.json"));
    }

    if (command == "score") cmd_score(run, cfg, p, err);
    else if (command == "retrieve") cmd_retrieve(run, cfg, p, err);
    else if (command == "mine") cmd_mine(run, cfg, p, sweep, err);
    else if (command == "train") cmd_train(run, cfg, p, err);
    else if (command == "prepare-data" && !p.synthetic.empty()) cmd_prepare_synthetic(run, cfg, p, err);
    else if (command == "prepare-data") cmd_prepare_pairs(run, cfg, p, err);
    else if (command == "ablate") cmd_ablate(run, cfg, p);

    out << run.data.str();
    write_manifest(run, command, args, cfg);
    return kExitOk;
}

} // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    try {
        return run_command(args, out, err);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        // DataError, FormatError, I/O failures.
        err << "error: " << e.what() << '\n';
        return kExitData;
    }
}

} // namespace aligner::cli
