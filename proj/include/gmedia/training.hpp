#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gmedia/baseline.hpp"
#include "gmedia/dataset.hpp"
#include "gmedia/models.hpp"
#include "gmedia/nn/tensor.hpp"

namespace gmedia {

// Schedule lengths used for the original robot data; the defaults below are desk-sized.
inline constexpr int kFullScalePretrainIterations = 30000;
inline constexpr int kFullScaleTrainIterations = 100000;
inline constexpr int kDefaultPretrainIterations = 2000;
inline constexpr int kDefaultTrainIterations = 10000;

struct LossPoint {
    int iteration = 0;
    double loss = 0.0;
};

struct TrainConfig {
    int iterations = kDefaultTrainIterations;
    int batch_size = 16;
    double learning_rate = 5e-4;
    std::uint64_t seed = 0;
    int log_every = 100;
    /// Called with every logged point (optional).
    std::function<void(const LossPoint&)> on_log;

    void validate() const;
};

struct TrainResult {
    double first_loss = 0.0;          // loss of the first mini-batch
    double final_loss = 0.0;          // loss of the last mini-batch
    std::vector<LossPoint> curve;     // mean loss over each log window
};

/// Mini-batch loss for the model's kind. Dynamics nets regress the scaled height delta
/// (plus the scaled scoop delta for ScoopDumpNet); the value net regresses value_label in mm.
/// Throws DataError when a ScoopDumpNet batch lacks intermediate states.
nn::TensorPtr batch_loss(const Model& model, nn::Tape* tape, std::span<const EpisodeRecord* const> batch);

/// Mean batch_loss over all records (forward only), evaluated in chunks of batch_size.
double dataset_loss(const Model& model, std::span<const EpisodeRecord> records, int batch_size = 16);

/// Adam on shuffled mini-batches drawn from `records`; continues from the model's current weights.
TrainResult train(Model& model, std::span<const EpisodeRecord> records, const TrainConfig& cfg);

/// Synthetic records whose outcome comes from the heuristic: each picks a random state from
/// `states`, a random valid grid-snapped action, and keeps that state's goal.
std::vector<EpisodeRecord> baseline_examples(std::span<const EpisodeRecord> states, std::size_t count, Pcg32& rng,
                                             const BaselineConfig& baseline = {});

/// Same optimization as train, but every mini-batch is fresh baseline_examples.
TrainResult pretrain_on_baseline(Model& model, std::span<const EpisodeRecord> states, const TrainConfig& cfg,
                                 const BaselineConfig& baseline = {});

/// CSV with header "iter,loss".
void write_loss_csv(const std::string& path, std::span<const LossPoint> curve);

}  // namespace gmedia
