#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gmedia/config.hpp"
#include "gmedia/dataset.hpp"
#include "gmedia/models.hpp"
#include "gmedia/policy.hpp"

namespace gmedia {

/// Media always starts in this half; evaluation goals sit in the other one.
inline constexpr Half kFillHalf = Half::left;

/// Runs `episodes` planning episodes of cfg.task.collect_actions steps against the simulator.
/// The tray is refilled every cfg.task.reset_every episodes; the first episode after a refill
/// targets a random pile on the empty half and each following one targets the opposite half.
/// Records hold f32-quantized noisy observations, so after[i] == before[i+1] inside a fill.
std::vector<EpisodeRecord> collect(const RunConfig& cfg, int episodes, const Scorer& scorer, std::uint64_t seed);

using GoalBuilder = std::function<HeightMap(const HeightMap& initial)>;

/// Pile of cfg.task.pile_sigma at cfg.task.pile_anchor on the half opposite kFillHalf.
GoalBuilder pile_goal(const RunConfig& cfg);
/// Raster goal on the half opposite kFillHalf.
GoalBuilder shape_goal(const std::string& pgm_path);

struct EvalResult {
    std::string scorer;
    /// errors[run][k]: MAE (mm) between the true state and the goal before action k; the last
    /// entry of each run is the error after the final action.
    std::vector<std::vector<double>> errors;

    double mean_at(std::size_t step) const;
    double std_at(std::size_t step) const;
    double mean_final() const { return mean_at(errors.front().size() - 1); }
};

/// Closed-loop runs: fresh fill, fixed goal, `actions` plan-and-execute steps per run.
/// The planner sees noisy observations; errors are measured on the true state.
EvalResult evaluate(const RunConfig& cfg, const GoalBuilder& goal, const Scorer& scorer, int runs, int actions,
                    std::uint64_t seed);

/// First step whose error has covered half of the curve's total reduction
/// (curve.size() - 1 when the curve never improves).
std::size_t steps_to_half_reduction(std::span<const double> curve);

/// Mean of l1(predict(before, params), after) over the records.
double next_state_mae(const NextStatePredictor& predictor, std::span<const EpisodeRecord> records);

/// Mean of |predicted volume change - recorded volume change| / volume before, over records.
double mass_conservation_gap(const NextStatePredictor& predictor, std::span<const EpisodeRecord> records);

struct RolloutStats {
    std::string model;
    std::vector<double> mean;  // per step 1..steps
    std::vector<double> std;
    std::size_t windows = 0;
};

/// Multi-step open-loop error: for every window of `steps` chained records, feeds the
/// predictor its own output along the recorded actions and compares each prediction with
/// the recorded after-state. Throws DataError when no window exists.
RolloutStats rollout_eval(std::span<const EpisodeRecord> records, const NextStatePredictor& predictor, int steps,
                          std::size_t stride = 1);

/// "run,step,mae_mm" with one row per pre-action error.
void write_eval_csv(std::ostream& out, const EvalResult& result);
/// "step,mean_mm,std_mm" over steps 0..actions (the last row is after the final action).
void write_eval_summary_csv(std::ostream& out, const EvalResult& result);
/// "model,mean_1,std_1,...,mean_k,std_k" with one row per model.
void write_rollout_csv(std::ostream& out, std::span<const RolloutStats> stats);

/// RFC-4180 field quoting.
std::string csv_field(const std::string& text);

}  // namespace gmedia
