#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gmedia/action.hpp"
#include "gmedia/baseline.hpp"
#include "gmedia/grid.hpp"
#include "gmedia/models.hpp"

namespace gmedia {

struct CemConfig {
    int samples = 100;
    int elites = 10;
    int iterations = 4;
    std::uint64_t seed = 0;

    /// Throws ConfigError unless 0 < elites < samples and iterations >= 1.
    void validate() const;
};

/// Scores a batch of candidate vectors; lower is better.
using BatchObjective = std::function<std::vector<double>(const std::vector<std::vector<double>>&)>;
/// Extra feasibility test on top of the box bounds.
using Feasibility = std::function<bool(std::span<const double>)>;

struct CemResult {
    std::vector<double> best;
    double best_score = 0.0;
    /// Best-ever score after each iteration.
    std::vector<double> best_history;
};

/// Cross-entropy minimization over a box. The first batch is uniform; later batches come from a
/// diagonal Gaussian fit to the lowest-scoring `elites` (ties by sample index, variance floored
/// at 1e-4 * range^2) with out-of-bounds or infeasible draws rejected. Returns the best sample
/// ever scored. Throws SamplingError when 100 * samples draws fail to fill a batch.
CemResult cem_minimize(std::span<const double> lower, std::span<const double> upper, const BatchObjective& objective,
                       const Feasibility& feasible, const CemConfig& cfg);

/// How good an action looks from state h given a goal; lower is better.
class Scorer {
public:
    virtual ~Scorer() = default;
    virtual std::string name() const = 0;
    virtual std::vector<double> score_many(const HeightMap& h, const HeightMap& goal,
                                           std::span<const ScoopDumpParams> candidates) const = 0;
    double score(const HeightMap& h, const ScoopDumpParams& p, const HeightMap& goal) const;
};

/// Distance between a predicted next state and the goal.
class PredictorScorer final : public Scorer {
public:
    explicit PredictorScorer(const NextStatePredictor& predictor) : predictor_(predictor) {}
    std::string name() const override { return predictor_.name(); }
    std::vector<double> score_many(const HeightMap& h, const HeightMap& goal,
                                   std::span<const ScoopDumpParams> candidates) const override;

private:
    const NextStatePredictor& predictor_;
};

/// The value net's output used directly as the score.
class ValueScorer final : public Scorer {
public:
    explicit ValueScorer(const ValueNet& model, int batch_size = 16);
    std::string name() const override { return "value"; }
    std::vector<double> score_many(const HeightMap& h, const HeightMap& goal,
                                   std::span<const ScoopDumpParams> candidates) const override;

private:
    const ValueNet& model_;
    int batch_size_;
};

/// Arbitrary per-candidate scoring rule.
class FunctionScorer final : public Scorer {
public:
    using Fn = std::function<double(const HeightMap&, const ScoopDumpParams&, const HeightMap&)>;
    FunctionScorer(std::string name, Fn fn) : name_(std::move(name)), fn_(std::move(fn)) {}
    std::string name() const override { return name_; }
    std::vector<double> score_many(const HeightMap& h, const HeightMap& goal,
                                   std::span<const ScoopDumpParams> candidates) const override;

private:
    std::string name_;
    Fn fn_;
};

/// l1_distance(predict_next(model, h, p), goal).
double dynamics_score(const HeightMap& h, const ScoopDumpParams& p, const HeightMap& goal, const DynamicsModel& model);
/// predict_value(model, h, goal, p).
double value_score(const HeightMap& h, const ScoopDumpParams& p, const HeightMap& goal, const ValueNet& model);

/// Picks the next scoop & dump with CEM over the action bounds. Candidate locations are snapped
/// to cell centers before scoring, so the result is grid-aligned and always valid.
ScoopDumpParams cem_plan(const HeightMap& h, const HeightMap& goal, const Scorer& scorer, const CemConfig& cfg,
                         CemResult* trace = nullptr);

}  // namespace gmedia
