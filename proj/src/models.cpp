#include "gmedia/models.hpp"

#include <algorithm>
#include <fstream>

#include "gmedia/errors.hpp"
#include "gmedia/nn/adam.hpp"
#include "gmedia/nn/ops.hpp"

namespace gmedia {
namespace {

constexpr int kWidth = 32;      // feature channels in towers and trunk
constexpr int kTailWidth = 16;  // value-net tail channels
constexpr int kTowerDepth = 3;
constexpr int kTrunkDepth = 10;

std::vector<int> repeated(int first, int width, int depth) {
    std::vector<int> channels{first};
    channels.insert(channels.end(), static_cast<std::size_t>(depth), width);
    return channels;
}

}  // namespace

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::single: return "single";
        case ModelKind::scoop_dump: return "scoop_dump";
        case ModelKind::value: return "value";
    }
    return "unknown";
}

ModelKind parse_model_kind(const std::string& text) {
    if (text == "single") return ModelKind::single;
    if (text == "scoop_dump" || text == "scoop-dump") return ModelKind::scoop_dump;
    if (text == "value") return ModelKind::value;
    throw ArgumentError("unknown model kind '" + text + "'");
}

nn::TensorPtr height_batch(std::span<const HeightMap* const> maps) {
    if (maps.empty()) {
        throw ArgumentError("empty height batch");
    }
    const GridSpec& spec = maps.front()->spec();
    const auto cells = static_cast<std::size_t>(spec.cell_count());
    std::vector<float> values(maps.size() * cells);
    for (std::size_t b = 0; b < maps.size(); ++b) {
        if (maps[b]->spec() != spec) {
            throw DimensionError("height batch mixes grid specs");
        }
        const auto heights = maps[b]->data();
        for (std::size_t i = 0; i < cells; ++i) {
            values[b * cells + i] = static_cast<float>(heights[i] / kHeightScale);
        }
    }
    return nn::make_tensor({static_cast<int>(maps.size()), 1, spec.rows, spec.cols}, std::move(values));
}

nn::TensorPtr action_batch(std::span<const ScoopDumpParams> params, const GridSpec& spec) {
    if (params.empty()) {
        throw ArgumentError("empty action batch");
    }
    const std::size_t per = static_cast<std::size_t>(ActionMap::kChannels) * spec.cell_count();
    std::vector<float> values(params.size() * per);
    for (std::size_t b = 0; b < params.size(); ++b) {
        const ActionMap map = render_action_map(params[b], spec);
        std::copy(map.data().begin(), map.data().end(), values.begin() + static_cast<std::ptrdiff_t>(b * per));
    }
    return nn::make_tensor({static_cast<int>(params.size()), ActionMap::kChannels, spec.rows, spec.cols},
                           std::move(values));
}

ConvStack::ConvStack(const std::string& prefix, std::vector<int> channels, int kernel, bool relu_last, Pcg32& rng) {
    for (std::size_t i = 0; i + 1 < channels.size(); ++i) {
        const int in = channels[i];
        const int out = channels[i + 1];
        const nn::Shape shape{out, in, kernel, kernel};
        nn::Tensor w = nn::init_weights(shape, in * kernel * kernel, rng);
        Layer layer;
        layer.name = prefix + "." + std::to_string(i);
        layer.weight = nn::make_param(shape, std::vector<float>(w.values().begin(), w.values().end()));
        layer.bias = nn::make_param({out}, std::vector<float>(static_cast<std::size_t>(out), 0.0f));
        layer.relu = relu_last || i + 2 < channels.size();
        layers_.push_back(std::move(layer));
    }
}

nn::TensorPtr ConvStack::forward(nn::Tape* tape, nn::TensorPtr x) const {
    for (const Layer& layer : layers_) {
        x = nn::conv2d(tape, x, layer.weight, layer.bias);
        if (layer.relu) {
            x = nn::relu(tape, x);
        }
    }
    return x;
}

void ConvStack::append_params(std::vector<nn::NamedTensor>& out) const {
    for (const Layer& layer : layers_) {
        out.push_back({layer.name + ".weight", layer.weight});
        out.push_back({layer.name + ".bias", layer.bias});
    }
}

DeltaNet::DeltaNet(const std::string& prefix, int state_channels, Pcg32& rng)
    : state_tower_(prefix + ".state_tower", repeated(state_channels, kWidth, kTowerDepth), 3, true, rng),
      action_tower_(prefix + ".action_tower", repeated(ActionMap::kChannels, kWidth, kTowerDepth), 3, true, rng),
      trunk_(prefix + ".trunk", repeated(2 * kWidth, kWidth, kTrunkDepth), 3, true, rng),
      head_(prefix + ".head", {kWidth, 1}, 1, false, rng) {}

nn::TensorPtr DeltaNet::forward(nn::Tape* tape, const nn::TensorPtr& state, const nn::TensorPtr& action) const {
    auto a = state_tower_.forward(tape, state);
    auto b = action_tower_.forward(tape, action);
    return head_.forward(tape, trunk_.forward(tape, nn::concat_channels(tape, a, b)));
}

void DeltaNet::append_params(std::vector<nn::NamedTensor>& out) const {
    state_tower_.append_params(out);
    action_tower_.append_params(out);
    trunk_.append_params(out);
    head_.append_params(out);
}

Model::Model(const GridSpec& spec) : spec_(spec) { spec_.validate(); }

std::vector<nn::TensorPtr> Model::parameters() const {
    std::vector<nn::TensorPtr> out;
    out.reserve(params_.size());
    for (const auto& p : params_) {
        out.push_back(p.tensor);
    }
    return out;
}

std::size_t Model::parameter_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) {
        n += p.tensor->size();
    }
    return n;
}

void Model::zero_grad() {
    for (const auto& p : params_) {
        p.tensor->zero_grad();
    }
}

void Model::save(std::ostream& out) const { nn::write_weights(out, params_); }

void Model::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    save(out);
}

void Model::load(std::istream& in) { nn::load_weights_into(in, params_); }

void Model::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path + "'");
    }
    load(in);
}

void Model::require_spec(const GridSpec& other) const {
    if (other != spec_) {
        throw DimensionError("height-map grid " + std::to_string(other.rows) + "x" + std::to_string(other.cols) +
                             " does not match the model grid " + std::to_string(spec_.rows) + "x" +
                             std::to_string(spec_.cols));
    }
}

namespace {

// One generator seeds every layer in declaration order; each architecture gets its own stream.
Pcg32 init_rng(std::uint64_t seed, ModelKind kind) { return Pcg32(seed, static_cast<std::uint64_t>(kind) + 1); }

}  // namespace

SingleNet::SingleNet(const GridSpec& spec, std::uint64_t seed) : DynamicsModel(spec), net_([&] {
    Pcg32 rng = init_rng(seed, ModelKind::single);
    return DeltaNet("single", 1, rng);
}()) {
    std::vector<nn::NamedTensor> params;
    net_.append_params(params);
    finalize(std::move(params));
}

nn::TensorPtr SingleNet::predict_delta(nn::Tape* tape, const nn::TensorPtr& state,
                                       const nn::TensorPtr& action) const {
    return net_.forward(tape, state, action);
}

ScoopDumpNet::ScoopDumpNet(const GridSpec& spec, std::uint64_t seed)
    : ScoopDumpNet(spec, init_rng(seed, ModelKind::scoop_dump)) {}

ScoopDumpNet::ScoopDumpNet(const GridSpec& spec, Pcg32 rng)
    : DynamicsModel(spec), top_("scoop_dump.top", 1, rng), bottom_("scoop_dump.bottom", 2, rng) {
    std::vector<nn::NamedTensor> params;
    top_.append_params(params);
    bottom_.append_params(params);
    finalize(std::move(params));
}

ScoopDumpNet::Halves ScoopDumpNet::forward(nn::Tape* tape, const nn::TensorPtr& state,
                                           const nn::TensorPtr& action) const {
    Halves out;
    out.scoop = top_.forward(tape, state, action);
    const auto scoop_fixed = nn::stop_gradient(out.scoop);
    const auto after_scoop = nn::add(tape, state, scoop_fixed);
    const auto mass = nn::spatial_sum_channel(tape, scoop_fixed);
    out.dump = bottom_.forward(tape, nn::concat_channels(tape, after_scoop, mass), action);
    out.total = nn::add(tape, scoop_fixed, out.dump);
    return out;
}

nn::TensorPtr ScoopDumpNet::predict_delta(nn::Tape* tape, const nn::TensorPtr& state,
                                          const nn::TensorPtr& action) const {
    return forward(tape, state, action).total;
}

ValueNet::ValueNet(const GridSpec& spec, std::uint64_t seed) : ValueNet(spec, init_rng(seed, ModelKind::value)) {}

ValueNet::ValueNet(const GridSpec& spec, Pcg32 rng)
    : Model(spec),
      state_tower_("value.state_tower", repeated(1, kWidth, kTowerDepth), 3, true, rng),
      goal_tower_("value.goal_tower", repeated(1, kWidth, kTowerDepth), 3, true, rng),
      action_tower_("value.action_tower", repeated(ActionMap::kChannels, kWidth, kTowerDepth), 3, true, rng),
      trunk_("value.trunk", repeated(3 * kWidth, kWidth, kTrunkDepth), 3, true, rng),
      tail_a_("value.tail_a", {kWidth, kTailWidth}, 3, true, rng),
      tail_b_("value.tail_b", {kTailWidth, kTailWidth}, 3, true, rng) {
    if (spec.rows % 16 != 0 || spec.cols % 16 != 0) {
        throw DimensionError("value net needs rows and cols divisible by 16");
    }
    const int features = kTailWidth * (spec.rows / 16) * (spec.cols / 16);
    nn::Tensor w = nn::init_weights({1, features}, features, rng);
    dense_weight_ = nn::make_param({1, features}, std::vector<float>(w.values().begin(), w.values().end()));
    dense_bias_ = nn::make_param({1}, {0.0f});
    std::vector<nn::NamedTensor> params;
    state_tower_.append_params(params);
    goal_tower_.append_params(params);
    action_tower_.append_params(params);
    trunk_.append_params(params);
    tail_a_.append_params(params);
    tail_b_.append_params(params);
    params.push_back({"value.dense.weight", dense_weight_});
    params.push_back({"value.dense.bias", dense_bias_});
    finalize(std::move(params));
}

nn::TensorPtr ValueNet::forward(nn::Tape* tape, const nn::TensorPtr& state, const nn::TensorPtr& goal,
                                const nn::TensorPtr& action) const {
    auto s = state_tower_.forward(tape, state);
    auto g = goal_tower_.forward(tape, goal);
    auto a = action_tower_.forward(tape, action);
    auto x = trunk_.forward(tape, nn::concat_channels(tape, nn::concat_channels(tape, s, g), a));
    x = nn::avg_pool_4x4(tape, tail_a_.forward(tape, x));
    x = nn::avg_pool_4x4(tape, tail_b_.forward(tape, x));
    return nn::dense(tape, nn::flatten(tape, x), dense_weight_, dense_bias_);
}

std::unique_ptr<Model> make_model(ModelKind kind, const GridSpec& spec, std::uint64_t seed) {
    switch (kind) {
        case ModelKind::single: return std::make_unique<SingleNet>(spec, seed);
        case ModelKind::scoop_dump: return std::make_unique<ScoopDumpNet>(spec, seed);
        case ModelKind::value: return std::make_unique<ValueNet>(spec, seed);
    }
    throw ArgumentError("unknown model kind");
}

std::unique_ptr<Model> load_model(ModelKind kind, const GridSpec& spec, const std::string& path) {
    auto model = make_model(kind, spec);
    model->load(path);
    return model;
}

void zero_weights(Model& model) {
    for (const auto& p : model.named_parameters()) {
        std::fill(p.tensor->values().begin(), p.tensor->values().end(), 0.0f);
    }
}

HeightMap predict_next(const DynamicsModel& model, const HeightMap& h, const ScoopDumpParams& p) {
    return NetPredictor(model, 1).predict(h, p);
}

double predict_value(const ValueNet& model, const HeightMap& h, const HeightMap& goal, const ScoopDumpParams& p) {
    if (h.spec() != model.spec() || goal.spec() != model.spec()) {
        throw DimensionError("value net input does not match the model grid");
    }
    const HeightMap* state[] = {&h};
    const HeightMap* target[] = {&goal};
    const ScoopDumpParams action[] = {p};
    return model.forward(nullptr, height_batch(state), height_batch(target), action_batch(action, model.spec()))->item();
}

HeightMap NextStatePredictor::predict(const HeightMap& h, const ScoopDumpParams& p) const {
    const StateAction query[] = {{&h, p}};
    return std::move(predict_many(query).front());
}

std::vector<HeightMap> BaselinePredictor::predict_many(std::span<const StateAction> queries) const {
    std::vector<HeightMap> out;
    out.reserve(queries.size());
    for (const auto& q : queries) {
        out.push_back(baseline_predict(*q.state, q.action, cfg_).next);
    }
    return out;
}

NetPredictor::NetPredictor(const DynamicsModel& model, int batch_size) : model_(model), batch_size_(batch_size) {
    if (batch_size < 1) {
        throw ArgumentError("batch size must be positive");
    }
}

std::vector<HeightMap> NetPredictor::predict_many(std::span<const StateAction> queries) const {
    const GridSpec& spec = model_.spec();
    const auto cells = static_cast<std::size_t>(spec.cell_count());
    std::vector<HeightMap> out;
    out.reserve(queries.size());
    for (std::size_t first = 0; first < queries.size(); first += static_cast<std::size_t>(batch_size_)) {
        const std::size_t count = std::min(queries.size() - first, static_cast<std::size_t>(batch_size_));
        std::vector<const HeightMap*> states;
        std::vector<ScoopDumpParams> actions;
        for (std::size_t i = first; i < first + count; ++i) {
            if (queries[i].state->spec() != spec) {
                throw DimensionError("height-map does not match the model grid");
            }
            states.push_back(queries[i].state);
            actions.push_back(queries[i].action);
        }
        const auto delta = model_.predict_delta(nullptr, height_batch(states), action_batch(actions, spec));
        const auto d = delta->values();
        for (std::size_t b = 0; b < count; ++b) {
            std::vector<double> next = states[b]->values();
            for (std::size_t i = 0; i < cells; ++i) {
                next[i] += kHeightScale * static_cast<double>(d[b * cells + i]);
            }
            out.push_back(HeightMap::clamped(spec, std::move(next)));
        }
    }
    return out;
}

std::vector<HeightMap> rollout(const NextStatePredictor& predictor, const HeightMap& h0,
                               std::span<const ScoopDumpParams> actions) {
    std::vector<HeightMap> states{h0};
    states.reserve(actions.size() + 1);
    for (const auto& a : actions) {
        states.push_back(predictor.predict(states.back(), a));
    }
    return states;
}

}  // namespace gmedia
