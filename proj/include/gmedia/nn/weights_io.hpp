#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gmedia/nn/tensor.hpp"

namespace gmedia::nn {

struct NamedTensor {
    std::string name;
    TensorPtr tensor;
};

/// "GMW1" weights file: u32 count, then per tensor a length-prefixed UTF-8 name, u32 rank,
/// u32 dims, and the raw little-endian f32 values, in the order given.
void write_weights(std::ostream& out, std::span<const NamedTensor> tensors);
std::vector<NamedTensor> read_weights(std::istream& in);

/// Copies stored values into `into`, matching by position; names and shapes must agree.
void load_weights_into(std::istream& in, std::span<const NamedTensor> into);

}  // namespace gmedia::nn
