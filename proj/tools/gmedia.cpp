// gmedia: command-line front end for data collection, training and evaluation.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <memory>

#include "gmedia/config.hpp"
#include "gmedia/dataset.hpp"
#include "gmedia/errors.hpp"
#include "gmedia/harness.hpp"
#include "gmedia/models.hpp"
#include "gmedia/pointcloud.hpp"
#include "gmedia/training.hpp"

using namespace gmedia;

namespace {

struct Common {
    std::string config_path;
    std::uint64_t seed = 0;
    std::string out;

    RunConfig config() const { return config_path.empty() ? RunConfig{} : load_run_config(config_path); }
};

void add_common(CLI::App* cmd, Common& common, bool out_required = true) {
    cmd->add_option("--config", common.config_path, "JSON run configuration")->check(CLI::ExistingFile);
    cmd->add_option("--seed", common.seed, "Seed for every random choice");
    auto* out = cmd->add_option("--out", common.out, "Output file");
    if (out_required) {
        out->required();
    }
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    return out;
}

// A next-state predictor that owns its network, if any.
struct LoadedPredictor {
    std::unique_ptr<Model> model;
    std::unique_ptr<NextStatePredictor> predictor;
};

LoadedPredictor load_predictor(const std::string& kind, const std::string& weights, const RunConfig& cfg) {
    LoadedPredictor out;
    if (kind == "baseline") {
        out.predictor = std::make_unique<BaselinePredictor>(cfg.baseline);
        return out;
    }
    const ModelKind mk = parse_model_kind(kind);
    if (mk == ModelKind::value) {
        throw ConfigError("the value net does not predict next states");
    }
    if (weights.empty()) {
        throw ConfigError("model '" + kind + "' needs --weights");
    }
    out.model = load_model(mk, cfg.grid, weights);
    out.predictor = std::make_unique<NetPredictor>(static_cast<const DynamicsModel&>(*out.model));
    return out;
}

// Owns whatever the scorer refers to.
struct LoadedScorer {
    LoadedPredictor predictor;
    std::unique_ptr<Model> value_model;
    std::unique_ptr<Scorer> scorer;
};

LoadedScorer load_scorer(const std::string& kind, const std::string& weights, const RunConfig& cfg) {
    LoadedScorer out;
    if (kind == "value") {
        if (weights.empty()) {
            throw ConfigError("scorer 'value' needs --weights");
        }
        out.value_model = load_model(ModelKind::value, cfg.grid, weights);
        out.scorer = std::make_unique<ValueScorer>(static_cast<const ValueNet&>(*out.value_model));
        return out;
    }
    out.predictor = load_predictor(kind, weights, cfg);
    out.scorer = std::make_unique<PredictorScorer>(*out.predictor.predictor);
    return out;
}

TrainConfig train_config(const RunConfig& cfg, int iterations, std::uint64_t seed) {
    TrainConfig tc;
    tc.iterations = iterations;
    tc.batch_size = cfg.training.batch_size;
    tc.learning_rate = cfg.training.learning_rate;
    tc.log_every = cfg.training.log_every;
    tc.seed = seed;
    tc.on_log = [](const LossPoint& p) { std::cerr << "iter " << p.iteration << " loss " << p.loss << '\n'; };
    return tc;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Granular media scoop & dump: simulation, learned models and planning"};
    app.require_subcommand(1);

    // collect
    Common collect_opts;
    int episodes = 0;
    std::string collect_scorer = "baseline";
    std::string collect_weights;
    auto* collect_cmd = app.add_subcommand("collect", "Record planning episodes against the simulator");
    add_common(collect_cmd, collect_opts);
    collect_cmd->add_option("--episodes", episodes, "Episodes to run (default: task.episodes)");
    collect_cmd->add_option("--scorer", collect_scorer, "baseline | single | scoop_dump")
        ->check(CLI::IsMember({"baseline", "single", "scoop_dump"}));
    collect_cmd->add_option("--weights", collect_weights, "Weights for a network scorer");

    // pretrain / train
    struct TrainOpts {
        Common common;
        std::string model = "scoop_dump";
        std::string data;
        std::string init;
        std::string loss_csv;
        int iterations = 0;
    };
    TrainOpts pretrain_opts;
    TrainOpts train_opts;
    auto add_train = [&](CLI::App* cmd, TrainOpts& o) {
        add_common(cmd, o.common);
        cmd->add_option("--model", o.model, "single | scoop_dump | value")
            ->check(CLI::IsMember({"single", "scoop_dump", "value"}));
        cmd->add_option("--data", o.data, "GMD1 dataset")->required()->check(CLI::ExistingFile);
        cmd->add_option("--init", o.init, "Start from these weights")->check(CLI::ExistingFile);
        cmd->add_option("--iterations", o.iterations, "Optimizer steps (default from config)");
        cmd->add_option("--loss-csv", o.loss_csv, "Write the loss curve here");
    };
    auto* pretrain_cmd = app.add_subcommand("pretrain", "Fit a network to heuristic predictions");
    add_train(pretrain_cmd, pretrain_opts);
    auto* train_cmd = app.add_subcommand("train", "Fit a network to recorded transitions");
    add_train(train_cmd, train_opts);

    // evaluate
    Common eval_opts;
    std::string eval_scorer = "baseline";
    std::string eval_weights;
    std::string task = "pile";
    std::string raster;
    std::string summary_path;
    int runs = 0;
    int actions = 0;
    auto* eval_cmd = app.add_subcommand("evaluate", "Closed-loop goal reaching in the simulator");
    add_common(eval_cmd, eval_opts);
    eval_cmd->add_option("--scorer", eval_scorer, "baseline | single | scoop_dump | value")
        ->check(CLI::IsMember({"baseline", "single", "scoop_dump", "value"}));
    eval_cmd->add_option("--weights", eval_weights, "Weights for a network scorer");
    eval_cmd->add_option("--task", task, "pile | shape")->check(CLI::IsMember({"pile", "shape"}));
    eval_cmd->add_option("--raster", raster, "PGM goal for the shape task")->check(CLI::ExistingFile);
    eval_cmd->add_option("--runs", runs, "Runs (default: task.eval_runs)");
    eval_cmd->add_option("--actions", actions, "Actions per run (default: task.eval_actions)");
    eval_cmd->add_option("--summary", summary_path, "Per-step mean/std CSV");

    // rollout-eval
    Common rollout_opts;
    std::string rollout_data;
    std::vector<std::string> rollout_models;
    int steps = 1;
    std::size_t stride = 1;
    auto* rollout_cmd = app.add_subcommand("rollout-eval", "Multi-step open-loop prediction error");
    add_common(rollout_cmd, rollout_opts);
    rollout_cmd->add_option("--data", rollout_data, "GMD1 dataset")->required()->check(CLI::ExistingFile);
    rollout_cmd->add_option("--model", rollout_models, "baseline, or kind=weights (repeatable)")->required();
    rollout_cmd->add_option("--steps", steps, "Rollout length")->check(CLI::PositiveNumber);
    rollout_cmd->add_option("--stride", stride, "Distance between window starts")->check(CLI::PositiveNumber);

    // predict
    Common predict_opts;
    std::string predict_model = "baseline";
    std::string predict_weights;
    std::string state_path;
    std::string action_path;
    auto* predict_cmd = app.add_subcommand("predict", "Predict the next height-map for one action");
    add_common(predict_cmd, predict_opts);
    predict_cmd->add_option("--model", predict_model, "baseline | single | scoop_dump")
        ->check(CLI::IsMember({"baseline", "single", "scoop_dump"}));
    predict_cmd->add_option("--weights", predict_weights, "Network weights");
    predict_cmd->add_option("--state", state_path, "GMH1 height-map")->required()->check(CLI::ExistingFile);
    predict_cmd->add_option("--action", action_path, "Action parameter file (9 f32)")
        ->required()
        ->check(CLI::ExistingFile);

    // ingest
    Common ingest_opts;
    std::string points_path;
    std::string pose_path;
    auto* ingest_cmd = app.add_subcommand("ingest", "Project a point cloud onto a height-map");
    add_common(ingest_cmd, ingest_opts);
    ingest_cmd->add_option("--points", points_path, "ASCII x y z file in meters")->required()->check(CLI::ExistingFile);
    ingest_cmd->add_option("--pose", pose_path, "Camera-to-tray pose JSON")->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*collect_cmd) {
            const RunConfig cfg = collect_opts.config();
            const auto scorer = load_scorer(collect_scorer, collect_weights, cfg);
            const auto records =
                collect(cfg, episodes > 0 ? episodes : cfg.task.episodes, *scorer.scorer, collect_opts.seed);
            write_dataset(collect_opts.out, records);
            std::cout << "wrote " << records.size() << " records to " << collect_opts.out << '\n';
        } else if (*pretrain_cmd || *train_cmd) {
            const bool pre = pretrain_cmd->parsed();
            TrainOpts& o = pre ? pretrain_opts : train_opts;
            const RunConfig cfg = o.common.config();
            const auto records = read_dataset(o.data, cfg.grid);
            auto model = make_model(parse_model_kind(o.model), cfg.grid, o.common.seed);
            if (!o.init.empty()) {
                model->load(o.init);
            }
            const int iters = o.iterations > 0
                                  ? o.iterations
                                  : (pre ? cfg.training.pretrain_iterations : cfg.training.train_iterations);
            const TrainConfig tc = train_config(cfg, iters, o.common.seed);
            const TrainResult result = pre ? pretrain_on_baseline(*model, records, tc, cfg.baseline)
                                           : train(*model, records, tc);
            model->save(o.common.out);
            if (!o.loss_csv.empty()) {
                write_loss_csv(o.loss_csv, result.curve);
            }
            std::cout << "final loss " << result.final_loss << "; weights written to " << o.common.out << '\n';
        } else if (*eval_cmd) {
            const RunConfig cfg = eval_opts.config();
            const auto scorer = load_scorer(eval_scorer, eval_weights, cfg);
            if (task == "shape" && raster.empty()) {
                throw ConfigError("the shape task needs --raster");
            }
            const GoalBuilder goal = task == "pile" ? pile_goal(cfg) : shape_goal(raster);
            const EvalResult result = evaluate(cfg, goal, *scorer.scorer, runs > 0 ? runs : cfg.task.eval_runs,
                                               actions > 0 ? actions : cfg.task.eval_actions, eval_opts.seed);
            auto out = open_out(eval_opts.out);
            write_eval_csv(out, result);
            if (!summary_path.empty()) {
                auto summary = open_out(summary_path);
                write_eval_summary_csv(summary, result);
            }
            const std::size_t last = result.errors.front().size() - 1;
            std::cout << result.scorer << ": initial " << result.mean_at(0) << " mm, final " << result.mean_at(last)
                      << " +- " << result.std_at(last) << " mm\n";
        } else if (*rollout_cmd) {
            const RunConfig cfg = rollout_opts.config();
            const auto records = read_dataset(rollout_data, cfg.grid);
            std::vector<RolloutStats> stats;
            for (const auto& spec : rollout_models) {
                const auto eq = spec.find('=');
                const std::string kind = spec.substr(0, eq);
                const std::string weights = eq == std::string::npos ? "" : spec.substr(eq + 1);
                const auto loaded = load_predictor(kind, weights, cfg);
                stats.push_back(rollout_eval(records, *loaded.predictor, steps, stride));
                std::cout << kind << ": " << stats.back().windows << " windows, step-" << steps << " mean "
                          << stats.back().mean.back() << " mm\n";
            }
            auto out = open_out(rollout_opts.out);
            write_rollout_csv(out, stats);
        } else if (*predict_cmd) {
            const RunConfig cfg = predict_opts.config();
            const HeightMap h = read_heightmap(state_path, cfg.grid);
            const ScoopDumpParams p = read_params(action_path);
            require_valid(p, h.spec());
            RunConfig model_cfg = cfg;
            model_cfg.grid = h.spec();
            const auto loaded = load_predictor(predict_model, predict_weights, model_cfg);
            write_heightmap(predict_opts.out, loaded.predictor->predict(h, p));
        } else if (*ingest_cmd) {
            const RunConfig cfg = ingest_opts.config();
            const TrayPose pose = pose_path.empty() ? TrayPose{} : load_tray_pose(pose_path);
            write_heightmap(ingest_opts.out, ingest_pointcloud(points_path, pose, cfg.grid));
        }
    } catch (const std::exception& e) {
        std::cerr << "gmedia: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
