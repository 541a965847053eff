#include "aligner/ablation.hpp"

#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "aligner/error.hpp"
#include "aligner/parallel.hpp"

namespace aligner {

void AblationGrid::validate() const {
    if (pooling.empty() || normalization.empty() || alphas.empty() || seeds.empty() ||
        tasks.empty()) {
        throw ConfigError("ablation grid has an empty axis");
    }
    for (double a : alphas) {
        if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("alpha must be in [0, 1]");
    }
    if (scope == NormScope::Tile && tile_size < 2) throw ConfigError("tile_size must be >= 2");
}

RetrievalTask materialize_task(const AblationTask& task, std::uint64_t seed) {
    if (const auto* spec = std::get_if<SyntheticCorpusSpec>(&task.source)) {
        auto s = *spec;
        s.seed = seed;
        auto data = generate_synthetic_pair(s);
        return {std::move(data.src), std::move(data.tgt), std::move(data.gold), task.label};
    }
    const auto& files = std::get<FileTaskSource>(task.source);
    return {load_embedding_set(files.src), load_embedding_set(files.tgt),
            read_alignment_tsv(files.gold), task.label};
}

AblationCell run_cell(const AblationTask& task, const RetrievalTask& data, Pooling pooling,
                      bool normalized, double alpha, std::uint64_t seed, const AblationGrid& grid) {
    RetrievalOptions options;
    options.scoring.pooling = pooling;
    options.scoring.mode = ScoreMode::EvalCosine;
    options.scoring.norm = {alpha, grid.scope, grid.tile_size, normalized};
    options.scoring.jobs = 1;
    AblationCell cell;
    cell.task = task.label;
    cell.pooling = pooling;
    cell.normalized = normalized;
    cell.alpha = alpha;
    cell.seed = seed;
    cell.result = evaluate_retrieval(data, options);
    return cell;
}

std::vector<AblationCell> run_grid(const AblationGrid& grid, std::size_t jobs) {
    grid.validate();

    struct Slot {
        std::size_t data;
        std::size_t task;
        Pooling pooling;
        bool normalized;
        double alpha;
        std::uint64_t seed;
    };
    std::vector<RetrievalTask> data;
    std::vector<Slot> slots;
    for (std::size_t t = 0; t < grid.tasks.size(); ++t) {
        for (auto seed : grid.seeds) {
            data.push_back(materialize_task(grid.tasks[t], seed));
            for (auto pooling : grid.pooling)
                for (bool normalized : grid.normalization)
                    for (double alpha : grid.alphas)
                        slots.push_back({data.size() - 1, t, pooling, normalized, alpha, seed});
        }
    }

    std::vector<AblationCell> cells(slots.size());
    parallel_for(slots.size(), jobs, [&](std::size_t i) {
        const auto& s = slots[i];
        cells[i] = run_cell(grid.tasks[s.task], data[s.data], s.pooling, s.normalized, s.alpha,
                            s.seed, grid);
    });
    return cells;
}

namespace {

std::vector<bool> parse_normalization_axis(const nlohmann::json& j) {
    std::vector<bool> out;
    for (const auto& v : j) {
        if (v.is_boolean()) {
            out.push_back(v.get<bool>());
        } else if (v.is_string() && (v == "on" || v == "norm")) {
            out.push_back(true);
        } else if (v.is_string() && (v == "off" || v == "w/o norm")) {
            out.push_back(false);
        } else {
            throw ConfigError("normalization axis entries are true/false or \"on\"/\"off\"");
        }
    }
    return out;
}

} // namespace

AblationGrid parse_grid_json(const std::string& text, const std::filesystem::path& base_dir) {
    AblationGrid grid;
    try {
        const auto j = nlohmann::json::parse(text);
        if (j.contains("pooling")) {
            grid.pooling.clear();
            for (const auto& p : j["pooling"]) grid.pooling.push_back(parse_pooling(p.get<std::string>()));
        }
        if (j.contains("normalization")) grid.normalization = parse_normalization_axis(j["normalization"]);
        if (j.contains("alphas")) grid.alphas = j["alphas"].get<std::vector<double>>();
        if (j.contains("seeds")) grid.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
        if (j.contains("scope")) grid.scope = parse_norm_scope(j["scope"].get<std::string>());
        if (j.contains("tile_size")) grid.tile_size = j["tile_size"].get<std::size_t>();
        for (const auto& t : j.at("tasks")) {
            AblationTask task;
            if (t.contains("synthetic")) {
                auto spec = synthetic_spec_from_json(t["synthetic"].dump());
                task.label = t.value("label", spec.src_lang + "-" + spec.tgt_lang);
                task.source = spec;
            } else {
                const auto resolve = [&](const char* key) {
                    std::filesystem::path p = t.at(key).get<std::string>();
                    return p.is_absolute() ? p : base_dir / p;
                };
                task.label = t.at("label").get<std::string>();
                task.source = FileTaskSource{resolve("src"), resolve("tgt"), resolve("gold")};
            }
            grid.tasks.push_back(std::move(task));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("ablation grid: ") + e.what());
    }
    grid.validate();
    return grid;
}

AblationGrid load_grid(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_grid_json(buf.str(), path.parent_path());
}

std::string cells_to_jsonl(const std::vector<AblationCell>& cells) {
    std::ostringstream out;
    for (const auto& c : cells) {
        nlohmann::ordered_json j;
        j["task"] = c.task;
        j["pooling"] = to_string(c.pooling);
        j["normalization"] = c.normalized;
        j["alpha"] = c.alpha;
        j["seed"] = c.seed;
        j["accuracy"] = c.result.accuracy;
        j["correct"] = c.result.correct;
        j["total"] = c.result.total;
        j["ties"] = c.result.ties;
        out << j.dump() << '\n';
    }
    return out.str();
}

std::string render_grid(const std::vector<AblationCell>& cells) {
    // (alpha, seed) -> task -> column -> accuracy
    using Column = std::pair<Pooling, bool>;
    std::map<std::pair<double, std::uint64_t>, std::map<std::string, std::map<Column, double>>> blocks;
    std::vector<Column> columns;
    std::vector<std::string> task_order;
    for (const auto& c : cells) {
        blocks[{c.alpha, c.seed}][c.task][{c.pooling, c.normalized}] = c.result.accuracy;
        const Column col{c.pooling, c.normalized};
        if (std::find(columns.begin(), columns.end(), col) == columns.end()) columns.push_back(col);
        if (std::find(task_order.begin(), task_order.end(), c.task) == task_order.end()) {
            task_order.push_back(c.task);
        }
    }
    std::sort(columns.begin(), columns.end(), [](const Column& a, const Column& b) {
        if (a.first != b.first) return a.first == Pooling::AvgPoolCosine;
        return !a.second && b.second;
    });

    std::ostringstream out;
    out << std::fixed;
    for (const auto& [key, rows] : blocks) {
        out << "alpha=" << std::setprecision(2) << key.first << " seed=" << key.second << '\n';
        out << std::left << std::setw(16) << "task";
        for (const auto& col : columns) {
            std::string name = std::string(to_string(col.first)) + (col.second ? " norm" : " w/o norm");
            out << std::right << std::setw(20) << name;
        }
        out << '\n';
        std::map<Column, std::pair<double, std::size_t>> averages;
        for (const auto& task : task_order) {
            auto it = rows.find(task);
            if (it == rows.end()) continue;
            out << std::left << std::setw(16) << task;
            for (const auto& col : columns) {
                auto v = it->second.find(col);
                if (v == it->second.end()) {
                    out << std::right << std::setw(20) << "-";
                    continue;
                }
                out << std::right << std::setw(20) << std::setprecision(1) << 100.0 * v->second;
                averages[col].first += v->second;
                ++averages[col].second;
            }
            out << '\n';
        }
        if (rows.size() > 1) {
            out << std::left << std::setw(16) << "average";
            for (const auto& col : columns) {
                const auto& a = averages[col];
                out << std::right << std::setw(20) << std::setprecision(1)
                    << (a.second ? 100.0 * a.first / static_cast<double>(a.second) : 0.0);
            }
            out << '\n';
        }
        out << '\n';
    }
    return out.str();
}

} // namespace aligner
