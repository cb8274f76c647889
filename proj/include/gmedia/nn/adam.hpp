#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gmedia/nn/tensor.hpp"
#include "gmedia/rng.hpp"

namespace gmedia::nn {

/// Adam optimizer state. Moment buffers are created on the first step, one per parameter.
struct AdamState {
    double lr = 5e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::int64_t step = 0;
    std::vector<std::vector<float>> first_moment;
    std::vector<std::vector<float>> second_moment;
};

/// One bias-corrected Adam update using each parameter's gradient buffer (missing buffers count
/// as zero). The step counter is incremented before the update.
void adam_step(std::span<const TensorPtr> params, AdamState& state);

/// Uniform in [-sqrt(6 / fan_in), +sqrt(6 / fan_in)], drawn in buffer order from rng.
Tensor init_weights(const Shape& shape, int fan_in, Pcg32& rng);

}  // namespace gmedia::nn
