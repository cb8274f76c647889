#pragma once

#include <string>

#include "gmedia/baseline.hpp"
#include "gmedia/grid.hpp"
#include "gmedia/policy.hpp"
#include "gmedia/sim.hpp"
#include "gmedia/training.hpp"

namespace gmedia {

struct TrainingConstants {
    int pretrain_iterations = kDefaultPretrainIterations;
    int train_iterations = kDefaultTrainIterations;
    int batch_size = 16;
    double learning_rate = 5e-4;
    int log_every = 100;
};

struct TaskConfig {
    double fill_height = 45.0;     // mm of media in the filled half at reset
    int collect_actions = 75;      // actions per collection episode
    int eval_actions = 100;        // actions per evaluation run
    int episodes = 20;             // collection episodes
    int eval_runs = 3;
    int reset_every = 2;           // episodes between refills during collection
    double pile_sigma = 6.0;       // cells
    PileAnchor pile_anchor = PileAnchor::center;  // evaluation pile location
};

/// Everything a CLI run needs. JSON keys: "grid", "sim", "baseline", "cem", "training", "task";
/// each section and each field is optional and falls back to the defaults above.
struct RunConfig {
    GridSpec grid;
    SimConfig sim;
    BaselineConfig baseline;
    CemConfig cem;
    TrainingConstants training;
    TaskConfig task;

    /// Throws ConfigError on any inconsistent or out-of-range setting.
    void validate() const;
};

/// Throws ConfigError on malformed JSON, unknown keys, or wrongly typed values.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);
std::string to_json(const RunConfig& cfg);

}  // namespace gmedia
