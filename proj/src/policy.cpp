#include "gmedia/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gmedia/errors.hpp"

namespace gmedia {
namespace {

constexpr double kVarianceFloor = 1e-4;

bool in_box(std::span<const double> v, std::span<const double> lower, std::span<const double> upper) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(v[i] >= lower[i] && v[i] <= upper[i])) {
            return false;
        }
    }
    return true;
}

ScoopDumpParams candidate_params(std::span<const double> v) { return snap_to_grid(ScoopDumpParams::from_array(v)); }

}  // namespace

void CemConfig::validate() const {
    if (samples < 2) throw ConfigError("cem needs at least two samples");
    if (elites < 1 || elites >= samples) throw ConfigError("cem elites must satisfy 0 < K < N");
    if (iterations < 1) throw ConfigError("cem needs at least one iteration");
}

CemResult cem_minimize(std::span<const double> lower, std::span<const double> upper, const BatchObjective& objective,
                       const Feasibility& feasible, const CemConfig& cfg) {
    cfg.validate();
    const std::size_t dims = lower.size();
    if (dims == 0 || upper.size() != dims) {
        throw DimensionError("cem bounds must be nonempty and of equal length");
    }
    for (std::size_t i = 0; i < dims; ++i) {
        if (!(upper[i] >= lower[i])) {
            throw ArgumentError("cem bounds are inverted");
        }
    }
    Pcg32 rng(cfg.seed, 0xcea);
    const auto n = static_cast<std::size_t>(cfg.samples);
    const auto k = static_cast<std::size_t>(cfg.elites);
    std::vector<double> mean(dims), sd(dims), floor_sd(dims);
    for (std::size_t d = 0; d < dims; ++d) {
        floor_sd[d] = std::sqrt(kVarianceFloor) * (upper[d] - lower[d]);
    }

    CemResult result;
    result.best_score = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < cfg.iterations; ++iter) {
        std::vector<std::vector<double>> batch;
        batch.reserve(n);
        std::size_t tries = 0;
        std::vector<double> v(dims);
        while (batch.size() < n) {
            if (tries++ >= 100 * n) {
                throw SamplingError("cem could not draw " + std::to_string(n) + " feasible samples in " +
                                    std::to_string(100 * n) + " tries");
            }
            for (std::size_t d = 0; d < dims; ++d) {
                v[d] = iter == 0 ? rng.uniform(lower[d], upper[d]) : rng.normal(mean[d], sd[d]);
            }
            if (in_box(v, lower, upper) && (!feasible || feasible(v))) {
                batch.push_back(v);
            }
        }

        std::vector<double> scores = objective(batch);
        if (scores.size() != n) {
            throw DimensionError("cem objective returned the wrong number of scores");
        }
        for (double& s : scores) {
            if (!std::isfinite(s)) {
                s = std::numeric_limits<double>::infinity();
            }
        }
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
        if (result.best.empty() || scores[order[0]] < result.best_score) {
            result.best = batch[order[0]];
            result.best_score = scores[order[0]];
        }
        result.best_history.push_back(result.best_score);

        for (std::size_t d = 0; d < dims; ++d) {
            double sum = 0.0;
            for (std::size_t e = 0; e < k; ++e) {
                sum += batch[order[e]][d];
            }
            mean[d] = sum / static_cast<double>(k);
            double var = 0.0;
            for (std::size_t e = 0; e < k; ++e) {
                const double diff = batch[order[e]][d] - mean[d];
                var += diff * diff;
            }
            sd[d] = std::max(std::sqrt(var / static_cast<double>(k)), floor_sd[d]);
        }
    }
    return result;
}

double Scorer::score(const HeightMap& h, const ScoopDumpParams& p, const HeightMap& goal) const {
    const ScoopDumpParams one[] = {p};
    return score_many(h, goal, one).front();
}

std::vector<double> PredictorScorer::score_many(const HeightMap& h, const HeightMap& goal,
                                                std::span<const ScoopDumpParams> candidates) const {
    std::vector<StateAction> queries;
    queries.reserve(candidates.size());
    for (const auto& p : candidates) {
        queries.push_back({&h, p});
    }
    const auto predicted = predictor_.predict_many(queries);
    std::vector<double> scores;
    scores.reserve(predicted.size());
    for (const auto& next : predicted) {
        scores.push_back(l1_distance(next, goal));
    }
    return scores;
}

ValueScorer::ValueScorer(const ValueNet& model, int batch_size) : model_(model), batch_size_(batch_size) {
    if (batch_size < 1) {
        throw ArgumentError("batch size must be positive");
    }
}

std::vector<double> ValueScorer::score_many(const HeightMap& h, const HeightMap& goal,
                                            std::span<const ScoopDumpParams> candidates) const {
    if (h.spec() != model_.spec() || goal.spec() != model_.spec()) {
        throw DimensionError("value net input does not match the model grid");
    }
    std::vector<double> scores;
    scores.reserve(candidates.size());
    for (std::size_t first = 0; first < candidates.size(); first += static_cast<std::size_t>(batch_size_)) {
        const std::size_t count = std::min(candidates.size() - first, static_cast<std::size_t>(batch_size_));
        const std::vector<const HeightMap*> states(count, &h);
        const std::vector<const HeightMap*> goals(count, &goal);
        const auto out = model_.forward(nullptr, height_batch(states), height_batch(goals),
                                        action_batch(candidates.subspan(first, count), model_.spec()));
        for (float v : out->values()) {
            scores.push_back(v);
        }
    }
    return scores;
}

std::vector<double> FunctionScorer::score_many(const HeightMap& h, const HeightMap& goal,
                                               std::span<const ScoopDumpParams> candidates) const {
    std::vector<double> scores;
    scores.reserve(candidates.size());
    for (const auto& p : candidates) {
        scores.push_back(fn_(h, p, goal));
    }
    return scores;
}

double dynamics_score(const HeightMap& h, const ScoopDumpParams& p, const HeightMap& goal, const DynamicsModel& model) {
    return l1_distance(predict_next(model, h, p), goal);
}

double value_score(const HeightMap& h, const ScoopDumpParams& p, const HeightMap& goal, const ValueNet& model) {
    return predict_value(model, h, goal, p);
}

ScoopDumpParams cem_plan(const HeightMap& h, const HeightMap& goal, const Scorer& scorer, const CemConfig& cfg,
                         CemResult* trace) {
    const GridSpec& spec = h.spec();
    const ParamBounds bounds = param_bounds(spec);
    const auto objective = [&](const std::vector<std::vector<double>>& batch) {
        std::vector<ScoopDumpParams> candidates;
        candidates.reserve(batch.size());
        for (const auto& v : batch) {
            candidates.push_back(candidate_params(v));
        }
        return scorer.score_many(h, goal, candidates);
    };
    const auto feasible = [&](std::span<const double> v) { return validate(candidate_params(v), spec).empty(); };
    CemResult result = cem_minimize(bounds.lower, bounds.upper, objective, feasible, cfg);
    const ScoopDumpParams best = candidate_params(result.best);
    if (trace) {
        *trace = std::move(result);
    }
    return best;
}

}  // namespace gmedia
