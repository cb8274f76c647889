#include "gmedia/training.hpp"

#include <fstream>
#include <numeric>

#include "gmedia/errors.hpp"
#include "gmedia/nn/adam.hpp"
#include "gmedia/nn/ops.hpp"

namespace gmedia {
namespace {

// [B,1,H,W] of (to - from) / kHeightScale.
nn::TensorPtr delta_target(std::span<const EpisodeRecord* const> batch, const HeightMap& (*from)(const EpisodeRecord&),
                           const HeightMap& (*to)(const EpisodeRecord&)) {
    const GridSpec& spec = batch.front()->before.spec();
    const auto cells = static_cast<std::size_t>(spec.cell_count());
    std::vector<float> values(batch.size() * cells);
    for (std::size_t b = 0; b < batch.size(); ++b) {
        const auto a = from(*batch[b]).data();
        const auto z = to(*batch[b]).data();
        for (std::size_t i = 0; i < cells; ++i) {
            values[b * cells + i] = static_cast<float>((z[i] - a[i]) / kHeightScale);
        }
    }
    return nn::make_tensor({static_cast<int>(batch.size()), 1, spec.rows, spec.cols}, std::move(values));
}

const HeightMap& before_of(const EpisodeRecord& r) { return r.before; }
const HeightMap& after_of(const EpisodeRecord& r) { return r.after; }
const HeightMap& scoop_of(const EpisodeRecord& r) { return *r.after_scoop; }

// Draws mini-batches of indices from successive shuffled passes over [0, n).
class BatchSampler {
public:
    BatchSampler(std::size_t n, std::uint64_t seed) : order_(n), rng_(seed, 0x7e57) {
        std::iota(order_.begin(), order_.end(), std::size_t{0});
        shuffle();
    }

    std::vector<std::size_t> next(int batch_size) {
        std::vector<std::size_t> out;
        while (out.size() < static_cast<std::size_t>(batch_size)) {
            if (cursor_ == order_.size()) {
                shuffle();
            }
            out.push_back(order_[cursor_++]);
        }
        return out;
    }

private:
    void shuffle() {
        for (std::size_t i = order_.size(); i > 1; --i) {
            std::swap(order_[i - 1], order_[rng_.below(static_cast<std::uint32_t>(i))]);
        }
        cursor_ = 0;
    }

    std::vector<std::size_t> order_;
    std::size_t cursor_ = 0;
    Pcg32 rng_;
};

TrainResult optimize(Model& model, const TrainConfig& cfg,
                     const std::function<std::vector<const EpisodeRecord*>(int iteration)>& next_batch) {
    cfg.validate();
    nn::AdamState adam;
    adam.lr = cfg.learning_rate;
    const auto params = model.parameters();
    TrainResult result;
    nn::Tape tape;
    double window_sum = 0.0;
    int window_count = 0;
    for (int it = 1; it <= cfg.iterations; ++it) {
        const auto batch = next_batch(it);
        tape.clear();
        model.zero_grad();
        const auto loss = batch_loss(model, &tape, batch);
        tape.backward(loss);
        nn::adam_step(params, adam);

        const double value = loss->item();
        if (it == 1) {
            result.first_loss = value;
        }
        result.final_loss = value;
        window_sum += value;
        ++window_count;
        if (it % cfg.log_every == 0 || it == cfg.iterations) {
            const LossPoint point{it, window_sum / window_count};
            result.curve.push_back(point);
            if (cfg.on_log) {
                cfg.on_log(point);
            }
            window_sum = 0.0;
            window_count = 0;
        }
    }
    tape.clear();
    model.zero_grad();
    return result;
}

}  // namespace

void TrainConfig::validate() const {
    if (iterations < 1) throw ConfigError("training iterations must be positive");
    if (batch_size < 1) throw ConfigError("batch size must be positive");
    if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
    if (log_every < 1) throw ConfigError("log interval must be positive");
}

nn::TensorPtr batch_loss(const Model& model, nn::Tape* tape, std::span<const EpisodeRecord* const> batch) {
    if (batch.empty()) {
        throw DataError("empty training batch");
    }
    std::vector<const HeightMap*> states;
    std::vector<ScoopDumpParams> actions;
    for (const EpisodeRecord* r : batch) {
        if (r->before.spec() != model.spec() || r->after.spec() != model.spec()) {
            throw DimensionError("training record does not match the model grid");
        }
        states.push_back(&r->before);
        actions.push_back(r->params);
    }
    const auto state = height_batch(states);
    const auto action = action_batch(actions, model.spec());

    switch (model.kind()) {
        case ModelKind::single: {
            const auto& net = static_cast<const SingleNet&>(model);
            return nn::l2_loss(tape, net.predict_delta(tape, state, action), delta_target(batch, before_of, after_of));
        }
        case ModelKind::scoop_dump: {
            for (const EpisodeRecord* r : batch) {
                if (!r->after_scoop) {
                    throw DataError("scoop & dump training needs the intermediate scoop state of every record");
                }
            }
            const auto& net = static_cast<const ScoopDumpNet&>(model);
            const auto out = net.forward(tape, state, action);
            const auto next_loss = nn::l2_loss(tape, out.total, delta_target(batch, before_of, after_of));
            const auto scoop_loss = nn::l2_loss(tape, out.scoop, delta_target(batch, before_of, scoop_of));
            return nn::add(tape, next_loss, scoop_loss);
        }
        case ModelKind::value: {
            std::vector<const HeightMap*> goals;
            std::vector<float> labels;
            for (const EpisodeRecord* r : batch) {
                goals.push_back(&r->goal);
                labels.push_back(static_cast<float>(value_label(*r)));
            }
            const auto& net = static_cast<const ValueNet&>(model);
            const auto pred = net.forward(tape, state, height_batch(goals), action);
            return nn::l2_loss(tape, pred, nn::make_tensor({static_cast<int>(batch.size()), 1}, std::move(labels)));
        }
    }
    throw ArgumentError("unknown model kind");
}

double dataset_loss(const Model& model, std::span<const EpisodeRecord> records, int batch_size) {
    if (records.empty()) {
        throw DataError("empty dataset");
    }
    double weighted = 0.0;
    for (std::size_t first = 0; first < records.size(); first += static_cast<std::size_t>(batch_size)) {
        const std::size_t count = std::min(records.size() - first, static_cast<std::size_t>(batch_size));
        std::vector<const EpisodeRecord*> batch;
        for (std::size_t i = first; i < first + count; ++i) {
            batch.push_back(&records[i]);
        }
        weighted += batch_loss(model, nullptr, batch)->item() * static_cast<double>(count);
    }
    return weighted / static_cast<double>(records.size());
}

TrainResult train(Model& model, std::span<const EpisodeRecord> records, const TrainConfig& cfg) {
    if (records.empty()) {
        throw DataError("cannot train on an empty dataset");
    }
    BatchSampler sampler(records.size(), cfg.seed);
    return optimize(model, cfg, [&](int) {
        std::vector<const EpisodeRecord*> batch;
        for (std::size_t i : sampler.next(cfg.batch_size)) {
            batch.push_back(&records[i]);
        }
        return batch;
    });
}

std::vector<EpisodeRecord> baseline_examples(std::span<const EpisodeRecord> states, std::size_t count, Pcg32& rng,
                                             const BaselineConfig& baseline) {
    if (states.empty()) {
        throw DataError("no states to pretrain on");
    }
    std::vector<EpisodeRecord> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        const EpisodeRecord& src = states[rng.below(static_cast<std::uint32_t>(states.size()))];
        const ScoopDumpParams p = sample_valid_params(src.before.spec(), rng);
        BaselineOutcome outcome = baseline_predict(src.before, p, baseline);
        out.push_back({src.before, p, std::move(outcome.after_scoop), std::move(outcome.next), src.goal});
    }
    return out;
}

TrainResult pretrain_on_baseline(Model& model, std::span<const EpisodeRecord> states, const TrainConfig& cfg,
                                 const BaselineConfig& baseline) {
    if (states.empty()) {
        throw DataError("cannot pretrain without states");
    }
    Pcg32 rng(cfg.seed, 0xba5e);
    std::vector<EpisodeRecord> examples;
    return optimize(model, cfg, [&](int) {
        examples = baseline_examples(states, static_cast<std::size_t>(cfg.batch_size), rng, baseline);
        std::vector<const EpisodeRecord*> batch;
        for (const auto& r : examples) {
            batch.push_back(&r);
        }
        return batch;
    });
}

void write_loss_csv(const std::string& path, std::span<const LossPoint> curve) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    out.precision(9);
    out << "iter,loss\n";
    for (const auto& p : curve) {
        out << p.iteration << ',' << p.loss << '\n';
    }
    if (!out) {
        throw IoError("failed writing '" + path + "'");
    }
}

}  // namespace gmedia
