#pragma once

#include "gmedia/nn/tensor.hpp"

// Differentiable operations. Every op takes an optional tape; with a null tape (or when no
// input requires a gradient) nothing is recorded, which is the reentrant inference path.
// Image tensors are laid out [batch, channels, height, width].
namespace gmedia::nn {

/// Same-padded, stride-1 cross-correlation. weight is [C_out, C_in, k, k] with k in {1, 3};
/// bias is [C_out].
TensorPtr conv2d(Tape* tape, const TensorPtr& x, const TensorPtr& weight, const TensorPtr& bias);

TensorPtr relu(Tape* tape, const TensorPtr& x);

/// Non-overlapping 4x4 mean pooling; H and W must be divisible by 4.
TensorPtr avg_pool_4x4(Tape* tape, const TensorPtr& x);

/// [B, F] x [O, F]^T + [O] -> [B, O].
TensorPtr dense(Tape* tape, const TensorPtr& x, const TensorPtr& weight, const TensorPtr& bias);

/// [B, ...] -> [B, prod(...)].
TensorPtr flatten(Tape* tape, const TensorPtr& x);

TensorPtr concat_channels(Tape* tape, const TensorPtr& a, const TensorPtr& b);

/// Elementwise sum of equally shaped tensors.
TensorPtr add(Tape* tape, const TensorPtr& a, const TensorPtr& b);

/// Identity forward; the result never carries a gradient back to x.
TensorPtr stop_gradient(const TensorPtr& x);

/// [B, C, H, W] -> [B, 1, H, W] filled with sum(x[b]) / (H * W).
TensorPtr spatial_sum_channel(Tape* tape, const TensorPtr& x);

/// Mean squared error over all elements; returns a [1] tensor. target never receives a gradient.
TensorPtr l2_loss(Tape* tape, const TensorPtr& pred, const TensorPtr& target);

}  // namespace gmedia::nn
