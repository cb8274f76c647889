#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gmedia/action.hpp"
#include "gmedia/baseline.hpp"
#include "gmedia/grid.hpp"
#include "gmedia/nn/tensor.hpp"
#include "gmedia/nn/weights_io.hpp"
#include "gmedia/rng.hpp"

namespace gmedia {

/// Heights (and height deltas) are divided by this many mm on the way into a network.
inline constexpr double kHeightScale = 50.0;

enum class ModelKind { single, scoop_dump, value };

std::string to_string(ModelKind kind);
/// Accepts "single", "scoop_dump" (or "scoop-dump") and "value"; throws ArgumentError otherwise.
ModelKind parse_model_kind(const std::string& text);

/// [B, 1, H, W] tensor of heights divided by kHeightScale.
nn::TensorPtr height_batch(std::span<const HeightMap* const> maps);
/// [B, 6, H, W] tensor of rendered action maps.
nn::TensorPtr action_batch(std::span<const ScoopDumpParams> params, const GridSpec& spec);

/// A stack of same-padded convolutions, each followed by ReLU except optionally the last.
class ConvStack {
public:
    ConvStack() = default;
    /// channels = {in, c1, c2, ...}; every layer uses kernel `kernel`.
    ConvStack(const std::string& prefix, std::vector<int> channels, int kernel, bool relu_last, Pcg32& rng);

    nn::TensorPtr forward(nn::Tape* tape, nn::TensorPtr x) const;
    void append_params(std::vector<nn::NamedTensor>& out) const;

private:
    struct Layer {
        std::string name;
        nn::TensorPtr weight;
        nn::TensorPtr bias;
        bool relu = true;
    };
    std::vector<Layer> layers_;
};

/// Fully-convolutional delta predictor: a state tower and an action tower (3 conv layers each),
/// a 10-layer trunk on their concatenation, and a 1x1 head emitting one channel (no ReLU).
class DeltaNet {
public:
    DeltaNet(const std::string& prefix, int state_channels, Pcg32& rng);

    nn::TensorPtr forward(nn::Tape* tape, const nn::TensorPtr& state, const nn::TensorPtr& action) const;
    void append_params(std::vector<nn::NamedTensor>& out) const;

private:
    ConvStack state_tower_;
    ConvStack action_tower_;
    ConvStack trunk_;
    ConvStack head_;
};

/// Common ownership of named parameters plus GMW1 persistence. Models are move-only since
/// parameters are shared tensors.
class Model {
public:
    virtual ~Model() = default;
    Model(const Model&) = delete;
    Model& operator=(const Model&) = delete;

    virtual ModelKind kind() const = 0;
    const GridSpec& spec() const { return spec_; }

    std::span<const nn::NamedTensor> named_parameters() const { return params_; }
    std::vector<nn::TensorPtr> parameters() const;
    std::size_t parameter_count() const;
    void zero_grad();

    void save(std::ostream& out) const;
    void save(const std::string& path) const;
    void load(std::istream& in);
    void load(const std::string& path);

protected:
    explicit Model(const GridSpec& spec);
    void finalize(std::vector<nn::NamedTensor> params) { params_ = std::move(params); }
    /// Throws DimensionError when `h` was not produced on this model's grid.
    void require_spec(const GridSpec& other) const;

private:
    GridSpec spec_;
    std::vector<nn::NamedTensor> params_;
};

/// Networks that predict a scaled height delta from (height, action).
class DynamicsModel : public Model {
public:
    /// state [B,1,H,W] (scaled), action [B,6,H,W] -> predicted scaled delta [B,1,H,W].
    virtual nn::TensorPtr predict_delta(nn::Tape* tape, const nn::TensorPtr& state,
                                        const nn::TensorPtr& action) const = 0;

protected:
    using Model::Model;
};

class SingleNet final : public DynamicsModel {
public:
    explicit SingleNet(const GridSpec& spec, std::uint64_t seed = 0);

    ModelKind kind() const override { return ModelKind::single; }
    nn::TensorPtr predict_delta(nn::Tape* tape, const nn::TensorPtr& state,
                                const nn::TensorPtr& action) const override;

private:
    DeltaNet net_;
};

class ScoopDumpNet final : public DynamicsModel {
public:
    struct Halves {
        nn::TensorPtr scoop;  // top-half output, carries gradient into the top half
        nn::TensorPtr dump;   // bottom-half output
        nn::TensorPtr total;  // stop_gradient(scoop) + dump
    };

    explicit ScoopDumpNet(const GridSpec& spec, std::uint64_t seed = 0);

    ModelKind kind() const override { return ModelKind::scoop_dump; }
    Halves forward(nn::Tape* tape, const nn::TensorPtr& state, const nn::TensorPtr& action) const;
    nn::TensorPtr predict_delta(nn::Tape* tape, const nn::TensorPtr& state,
                                const nn::TensorPtr& action) const override;

private:
    ScoopDumpNet(const GridSpec& spec, Pcg32 rng);
    DeltaNet top_;
    DeltaNet bottom_;
};

class ValueNet final : public Model {
public:
    explicit ValueNet(const GridSpec& spec, std::uint64_t seed = 0);

    ModelKind kind() const override { return ModelKind::value; }
    /// state, goal [B,1,H,W] (scaled), action [B,6,H,W] -> [B,1] in mm.
    nn::TensorPtr forward(nn::Tape* tape, const nn::TensorPtr& state, const nn::TensorPtr& goal,
                          const nn::TensorPtr& action) const;

private:
    ValueNet(const GridSpec& spec, Pcg32 rng);
    ConvStack state_tower_;
    ConvStack goal_tower_;
    ConvStack action_tower_;
    ConvStack trunk_;
    ConvStack tail_a_;
    ConvStack tail_b_;
    nn::TensorPtr dense_weight_;
    nn::TensorPtr dense_bias_;
};

/// Fresh model with seeded weights (biases zero).
std::unique_ptr<Model> make_model(ModelKind kind, const GridSpec& spec, std::uint64_t seed = 0);
/// Builds the right architecture and loads weights from a GMW1 file.
std::unique_ptr<Model> load_model(ModelKind kind, const GridSpec& spec, const std::string& path);

/// Sets every parameter to zero.
void zero_weights(Model& model);

/// clamp(h + kHeightScale * delta, 0, max_height).
HeightMap predict_next(const DynamicsModel& model, const HeightMap& h, const ScoopDumpParams& p);
/// Predicted change in distance to goal (mm); negative means the action helps.
double predict_value(const ValueNet& model, const HeightMap& h, const HeightMap& goal, const ScoopDumpParams& p);

struct StateAction {
    const HeightMap* state = nullptr;
    ScoopDumpParams action;
};

/// Anything that guesses the next height-map: the heuristic or a trained network.
class NextStatePredictor {
public:
    virtual ~NextStatePredictor() = default;
    virtual std::string name() const = 0;
    virtual std::vector<HeightMap> predict_many(std::span<const StateAction> queries) const = 0;
    HeightMap predict(const HeightMap& h, const ScoopDumpParams& p) const;
};

class BaselinePredictor final : public NextStatePredictor {
public:
    explicit BaselinePredictor(BaselineConfig cfg = {}) : cfg_(cfg) {}
    std::string name() const override { return "baseline"; }
    std::vector<HeightMap> predict_many(std::span<const StateAction> queries) const override;

private:
    BaselineConfig cfg_;
};

/// Wraps a dynamics network; queries run in batches of `batch_size`.
class NetPredictor final : public NextStatePredictor {
public:
    explicit NetPredictor(const DynamicsModel& model, int batch_size = 16);
    std::string name() const override { return to_string(model_.kind()); }
    std::vector<HeightMap> predict_many(std::span<const StateAction> queries) const override;

private:
    const DynamicsModel& model_;
    int batch_size_;
};

/// Feeds each prediction back in as the next state; returns actions.size() + 1 maps.
std::vector<HeightMap> rollout(const NextStatePredictor& predictor, const HeightMap& h0,
                               std::span<const ScoopDumpParams> actions);

}  // namespace gmedia
