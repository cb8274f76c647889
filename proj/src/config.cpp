#include "gmedia/config.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "gmedia/errors.hpp"

namespace gmedia {
namespace {

using nlohmann::json;

// Reads optional fields from one JSON object and rejects anything it was not asked about.
class Section {
public:
    Section(const json& root, const std::string& name) : name_(name) {
        if (!root.contains(name)) {
            return;
        }
        node_ = &root.at(name);
        if (!node_->is_object()) {
            throw ConfigError("config section '" + name + "' must be an object");
        }
    }

    template <typename T>
    void read(const char* key, T& field) {
        known_.emplace_back(key);
        if (!node_ || !node_->contains(key)) {
            return;
        }
        const json& v = node_->at(key);
        try {
            if constexpr (std::is_same_v<T, double>) {
                if (!v.is_number()) throw ConfigError("");
            } else if constexpr (std::is_integral_v<T>) {
                if (!v.is_number_integer()) throw ConfigError("");
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (!v.is_string()) throw ConfigError("");
            }
            field = v.get<T>();
        } catch (const std::exception&) {
            throw ConfigError("config field '" + name_ + "." + key + "' has the wrong type");
        }
    }

    void finish() const {
        if (!node_) {
            return;
        }
        for (const auto& item : node_->items()) {
            if (std::find(known_.begin(), known_.end(), item.key()) == known_.end()) {
                throw ConfigError("unknown config field '" + name_ + "." + item.key() + "'");
            }
        }
    }

private:
    std::string name_;
    const json* node_ = nullptr;
    std::vector<std::string> known_;
};

}  // namespace

void RunConfig::validate() const {
    try {
        grid.validate();
        sim.validate();
    } catch (const ArgumentError& e) {
        throw ConfigError(e.what());
    }
    cem.validate();
    if (!(baseline.scoop_width > 0.0) || !(baseline.deposit_sigma > 0.0)) {
        throw ConfigError("baseline scoop width and deposit sigma must be positive");
    }
    TrainConfig check;
    check.iterations = training.train_iterations;
    check.batch_size = training.batch_size;
    check.learning_rate = training.learning_rate;
    check.log_every = training.log_every;
    check.validate();
    if (training.pretrain_iterations < 0) throw ConfigError("pretrain iterations must be non-negative");
    if (!(task.fill_height > 0.0) || task.fill_height > grid.max_height) {
        throw ConfigError("fill height must lie in (0, max_height]");
    }
    if (task.collect_actions < 1 || task.eval_actions < 1) throw ConfigError("action counts must be positive");
    if (task.episodes < 1 || task.eval_runs < 1) throw ConfigError("episode and run counts must be positive");
    if (task.reset_every < 1) throw ConfigError("reset interval must be positive");
    if (!(task.pile_sigma > 0.0)) throw ConfigError("pile sigma must be positive");
}

RunConfig parse_run_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed config JSON: ") + e.what());
    }
    if (!root.is_object()) {
        throw ConfigError("config must be a JSON object");
    }
    static const std::vector<std::string> sections{"grid", "sim", "baseline", "cem", "training", "task"};
    for (const auto& item : root.items()) {
        if (std::find(sections.begin(), sections.end(), item.key()) == sections.end()) {
            throw ConfigError("unknown config section '" + item.key() + "'");
        }
    }

    RunConfig cfg;
    const bool grid_given = root.contains("grid");
    Section grid(root, "grid");
    grid.read("rows", cfg.grid.rows);
    grid.read("cols", cfg.grid.cols);
    grid.read("cell_size", cfg.grid.cell_size);
    const bool divider_given = grid_given && root.at("grid").contains("divider_col");
    grid.read("divider_col", cfg.grid.divider_col);
    grid.read("max_height", cfg.grid.max_height);
    grid.finish();
    if (!divider_given) {
        cfg.grid.divider_col = cfg.grid.cols / 2;
    }

    Section sim(root, "sim");
    sim.read("scoop_width", cfg.sim.scoop_width);
    sim.read("carry_capacity", cfg.sim.carry_capacity);
    sim.read("spill_fraction", cfg.sim.spill_fraction);
    sim.read("repose_angle", cfg.sim.repose_angle);
    sim.read("dump_sigma", cfg.sim.dump_sigma);
    sim.read("noise_std", cfg.sim.noise_std);
    sim.read("seed", cfg.sim.seed);
    sim.finish();

    Section baseline(root, "baseline");
    baseline.read("scoop_width", cfg.baseline.scoop_width);
    baseline.read("deposit_sigma", cfg.baseline.deposit_sigma);
    baseline.finish();

    Section cem(root, "cem");
    cem.read("samples", cfg.cem.samples);
    cem.read("elites", cfg.cem.elites);
    cem.read("iterations", cfg.cem.iterations);
    cem.read("seed", cfg.cem.seed);
    cem.finish();

    Section training(root, "training");
    training.read("pretrain_iterations", cfg.training.pretrain_iterations);
    training.read("train_iterations", cfg.training.train_iterations);
    training.read("batch_size", cfg.training.batch_size);
    training.read("learning_rate", cfg.training.learning_rate);
    training.read("log_every", cfg.training.log_every);
    training.finish();

    Section task(root, "task");
    task.read("fill_height", cfg.task.fill_height);
    task.read("collect_actions", cfg.task.collect_actions);
    task.read("eval_actions", cfg.task.eval_actions);
    task.read("episodes", cfg.task.episodes);
    task.read("eval_runs", cfg.task.eval_runs);
    task.read("reset_every", cfg.task.reset_every);
    task.read("pile_sigma", cfg.task.pile_sigma);
    std::string anchor = to_string(cfg.task.pile_anchor);
    task.read("pile_anchor", anchor);
    task.finish();
    try {
        cfg.task.pile_anchor = parse_pile_anchor(anchor);
    } catch (const ArgumentError& e) {
        throw ConfigError(e.what());
    }

    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config '" + path + "'");
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_run_config(text.str());
}

std::string to_json(const RunConfig& cfg) {
    json root;
    root["grid"] = {{"rows", cfg.grid.rows},
                    {"cols", cfg.grid.cols},
                    {"cell_size", cfg.grid.cell_size},
                    {"divider_col", cfg.grid.divider_col},
                    {"max_height", cfg.grid.max_height}};
    root["sim"] = {{"scoop_width", cfg.sim.scoop_width},   {"carry_capacity", cfg.sim.carry_capacity},
                   {"spill_fraction", cfg.sim.spill_fraction}, {"repose_angle", cfg.sim.repose_angle},
                   {"dump_sigma", cfg.sim.dump_sigma},     {"noise_std", cfg.sim.noise_std},
                   {"seed", cfg.sim.seed}};
    root["baseline"] = {{"scoop_width", cfg.baseline.scoop_width}, {"deposit_sigma", cfg.baseline.deposit_sigma}};
    root["cem"] = {{"samples", cfg.cem.samples},
                   {"elites", cfg.cem.elites},
                   {"iterations", cfg.cem.iterations},
                   {"seed", cfg.cem.seed}};
    root["training"] = {{"pretrain_iterations", cfg.training.pretrain_iterations},
                        {"train_iterations", cfg.training.train_iterations},
                        {"batch_size", cfg.training.batch_size},
                        {"learning_rate", cfg.training.learning_rate},
                        {"log_every", cfg.training.log_every}};
    root["task"] = {{"fill_height", cfg.task.fill_height},   {"collect_actions", cfg.task.collect_actions},
                    {"eval_actions", cfg.task.eval_actions}, {"episodes", cfg.task.episodes},
                    {"eval_runs", cfg.task.eval_runs},       {"reset_every", cfg.task.reset_every},
                    {"pile_sigma", cfg.task.pile_sigma},     {"pile_anchor", to_string(cfg.task.pile_anchor)}};
    return root.dump(2);
}

}  // namespace gmedia
