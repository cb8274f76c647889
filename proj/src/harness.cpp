#include "gmedia/harness.hpp"

#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

#include "gmedia/errors.hpp"
#include "gmedia/sim.hpp"

namespace gmedia {
namespace {

// Stream ids for derive_seed, so each consumer of randomness is independent.
enum : std::uint64_t { kGoalStream = 1, kObserveStream = 2, kPlanStream = 3 };

ScoopDumpParams quantized(const ScoopDumpParams& p) {
    auto v = p.to_array();
    for (double& x : v) {
        x = static_cast<float>(x);
    }
    return ScoopDumpParams::from_array(v);
}

CemConfig plan_config(const CemConfig& base, std::uint64_t seed, std::uint64_t step) {
    CemConfig cfg = base;
    cfg.seed = derive_seed(derive_seed(seed, kPlanStream), step);
    return cfg;
}

double sample_std(std::span<const double> v) {
    if (v.size() < 2) {
        return 0.0;
    }
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) {
        ss += (x - mean) * (x - mean);
    }
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

std::string number(double v) {
    std::ostringstream out;
    out.precision(9);
    out << v;
    return out.str();
}

}  // namespace

std::vector<EpisodeRecord> collect(const RunConfig& cfg, int episodes, const Scorer& scorer, std::uint64_t seed) {
    cfg.validate();
    if (episodes < 1) {
        throw ConfigError("collect needs at least one episode");
    }
    Pcg32 goal_rng(derive_seed(seed, kGoalStream));
    Pcg32 observe_rng(derive_seed(seed, kObserveStream));
    const auto anchors = all_pile_anchors();

    std::vector<EpisodeRecord> records;
    records.reserve(static_cast<std::size_t>(episodes) * static_cast<std::size_t>(cfg.task.collect_actions));
    HeightMap state(cfg.grid);
    HeightMap seen(cfg.grid);
    Half target = other(kFillHalf);
    std::uint64_t step = 0;
    for (int e = 0; e < episodes; ++e) {
        if (e % cfg.task.reset_every == 0) {
            state = fill_half(cfg.grid, kFillHalf, cfg.task.fill_height);
            seen = observe(state, cfg.sim, observe_rng).quantized();
            target = other(kFillHalf);
        } else {
            target = other(target);
        }
        const PileAnchor anchor = anchors[goal_rng.below(static_cast<std::uint32_t>(anchors.size()))];
        const HeightMap goal = make_pile_goal(state, target, anchor, cfg.task.pile_sigma).quantized();
        for (int a = 0; a < cfg.task.collect_actions; ++a, ++step) {
            const ScoopDumpParams p = quantized(cem_plan(seen, goal, scorer, plan_config(cfg.cem, seed, step)));
            SimOutcome outcome = sim_step(state, p, cfg.sim);
            HeightMap seen_scoop = observe(outcome.after_scoop, cfg.sim, observe_rng).quantized();
            HeightMap seen_next = observe(outcome.next, cfg.sim, observe_rng).quantized();
            records.push_back({seen, p, std::move(seen_scoop), seen_next, goal});
            state = std::move(outcome.next);
            seen = std::move(seen_next);
        }
    }
    return records;
}

GoalBuilder pile_goal(const RunConfig& cfg) {
    const PileAnchor anchor = cfg.task.pile_anchor;
    const double sigma = cfg.task.pile_sigma;
    return [anchor, sigma](const HeightMap& initial) {
        return make_pile_goal(initial, other(kFillHalf), anchor, sigma);
    };
}

GoalBuilder shape_goal(const std::string& pgm_path) {
    return [pgm_path](const HeightMap& initial) { return load_shape_goal(pgm_path, initial, other(kFillHalf)); };
}

double EvalResult::mean_at(std::size_t step) const {
    double sum = 0.0;
    for (const auto& run : errors) {
        sum += run.at(step);
    }
    return sum / static_cast<double>(errors.size());
}

double EvalResult::std_at(std::size_t step) const {
    std::vector<double> v;
    for (const auto& run : errors) {
        v.push_back(run.at(step));
    }
    return sample_std(v);
}

EvalResult evaluate(const RunConfig& cfg, const GoalBuilder& goal_builder, const Scorer& scorer, int runs,
                    int actions, std::uint64_t seed) {
    cfg.validate();
    if (runs < 1 || actions < 1) {
        throw ConfigError("evaluation needs at least one run and one action");
    }
    EvalResult result;
    result.scorer = scorer.name();
    for (int run = 0; run < runs; ++run) {
        const std::uint64_t run_seed = derive_seed(seed, static_cast<std::uint64_t>(run));
        Pcg32 observe_rng(derive_seed(run_seed, kObserveStream));
        HeightMap state = fill_half(cfg.grid, kFillHalf, cfg.task.fill_height);
        const HeightMap goal = goal_builder(state);
        std::vector<double> curve;
        curve.reserve(static_cast<std::size_t>(actions) + 1);
        for (int a = 0; a < actions; ++a) {
            curve.push_back(l1_distance(state, goal));
            const HeightMap seen = observe(state, cfg.sim, observe_rng);
            const ScoopDumpParams p =
                cem_plan(seen, goal, scorer, plan_config(cfg.cem, run_seed, static_cast<std::uint64_t>(a)));
            state = sim_step(state, p, cfg.sim).next;
        }
        curve.push_back(l1_distance(state, goal));
        result.errors.push_back(std::move(curve));
    }
    return result;
}

std::size_t steps_to_half_reduction(std::span<const double> curve) {
    if (curve.empty()) {
        throw ArgumentError("empty error curve");
    }
    const double target = curve.front() - 0.5 * (curve.front() - curve.back());
    if (!(curve.back() < curve.front())) {
        return curve.size() - 1;
    }
    for (std::size_t k = 0; k < curve.size(); ++k) {
        if (curve[k] <= target) {
            return k;
        }
    }
    return curve.size() - 1;
}

double next_state_mae(const NextStatePredictor& predictor, std::span<const EpisodeRecord> records) {
    if (records.empty()) {
        throw DataError("no records to evaluate");
    }
    std::vector<StateAction> queries;
    queries.reserve(records.size());
    for (const auto& r : records) {
        queries.push_back({&r.before, r.params});
    }
    const auto predicted = predictor.predict_many(queries);
    double sum = 0.0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        sum += l1_distance(predicted[i], records[i].after);
    }
    return sum / static_cast<double>(records.size());
}

double mass_conservation_gap(const NextStatePredictor& predictor, std::span<const EpisodeRecord> records) {
    if (records.empty()) {
        throw DataError("no records to evaluate");
    }
    std::vector<StateAction> queries;
    for (const auto& r : records) {
        queries.push_back({&r.before, r.params});
    }
    const auto predicted = predictor.predict_many(queries);
    double sum = 0.0;
    std::size_t counted = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const double before = total_volume(records[i].before);
        if (before <= 0.0) {
            continue;
        }
        const double true_change = total_volume(records[i].after) - before;
        const double predicted_change = total_volume(predicted[i]) - before;
        sum += std::abs(predicted_change - true_change) / before;
        ++counted;
    }
    return counted ? sum / static_cast<double>(counted) : 0.0;
}

RolloutStats rollout_eval(std::span<const EpisodeRecord> records, const NextStatePredictor& predictor, int steps,
                          std::size_t stride) {
    if (steps < 1) {
        throw ArgumentError("rollout needs at least one step");
    }
    if (stride < 1) {
        throw ArgumentError("window stride must be positive");
    }
    const auto len = static_cast<std::size_t>(steps);
    std::vector<std::vector<double>> per_step(len);
    RolloutStats stats;
    stats.model = predictor.name();
    for (std::size_t first = 0; first + len <= records.size(); first += stride) {
        if (!is_chained(records, first, len)) {
            continue;
        }
        std::vector<ScoopDumpParams> actions;
        for (std::size_t k = 0; k < len; ++k) {
            actions.push_back(records[first + k].params);
        }
        const auto states = rollout(predictor, records[first].before, actions);
        for (std::size_t k = 0; k < len; ++k) {
            per_step[k].push_back(l1_distance(states[k + 1], records[first + k].after));
        }
        ++stats.windows;
    }
    if (stats.windows == 0) {
        throw DataError("dataset has no window of " + std::to_string(steps) + " consecutive records");
    }
    for (const auto& errors : per_step) {
        stats.mean.push_back(std::accumulate(errors.begin(), errors.end(), 0.0) / static_cast<double>(errors.size()));
        stats.std.push_back(sample_std(errors));
    }
    return stats;
}

std::string csv_field(const std::string& text) {
    if (text.find_first_of(",\"\r\n") == std::string::npos) {
        return text;
    }
    std::string out = "\"";
    for (char c : text) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    out += '"';
    return out;
}

void write_eval_csv(std::ostream& out, const EvalResult& result) {
    out << "run,step,mae_mm\r\n";
    for (std::size_t run = 0; run < result.errors.size(); ++run) {
        const auto& curve = result.errors[run];
        for (std::size_t step = 0; step + 1 < curve.size(); ++step) {
            out << run << ',' << step << ',' << number(curve[step]) << "\r\n";
        }
    }
}

void write_eval_summary_csv(std::ostream& out, const EvalResult& result) {
    out << "step,mean_mm,std_mm\r\n";
    for (std::size_t step = 0; step < result.errors.front().size(); ++step) {
        out << step << ',' << number(result.mean_at(step)) << ',' << number(result.std_at(step)) << "\r\n";
    }
}

void write_rollout_csv(std::ostream& out, std::span<const RolloutStats> stats) {
    if (stats.empty()) {
        throw ArgumentError("no rollout statistics to write");
    }
    const std::size_t steps = stats.front().mean.size();
    out << "model";
    for (std::size_t k = 1; k <= steps; ++k) {
        out << ",mean_" << k << ",std_" << k;
    }
    out << "\r\n";
    for (const auto& s : stats) {
        if (s.mean.size() != steps) {
            throw DimensionError("rollout statistics disagree on the step count");
        }
        out << csv_field(s.model);
        for (std::size_t k = 0; k < steps; ++k) {
            out << ',' << number(s.mean[k]) << ',' << number(s.std[k]);
        }
        out << "\r\n";
    }
}

}  // namespace gmedia
