#include "gmedia/nn/weights_io.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include "gmedia/binary_io.hpp"
#include "gmedia/errors.hpp"

namespace gmedia::nn {

void write_weights(std::ostream& out, std::span<const NamedTensor> tensors) {
    binary::write_magic(out, "GMW1");
    binary::write_u32(out, static_cast<std::uint32_t>(tensors.size()));
    for (const auto& [name, tensor] : tensors) {
        binary::write_u32(out, static_cast<std::uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        binary::write_u32(out, static_cast<std::uint32_t>(tensor->rank()));
        for (int d : tensor->shape()) {
            binary::write_u32(out, static_cast<std::uint32_t>(d));
        }
        for (float v : tensor->values()) {
            binary::write_f32(out, v);
        }
    }
    if (!out) {
        throw IoError("failed writing weights");
    }
}

std::vector<NamedTensor> read_weights(std::istream& in) {
    binary::expect_magic(in, "GMW1");
    const std::uint32_t count = binary::read_u32(in);
    std::vector<NamedTensor> tensors;
    tensors.reserve(count);
    for (std::uint32_t k = 0; k < count; ++k) {
        const std::uint32_t name_len = binary::read_u32(in);
        if (name_len > 4096) {
            throw IoError("weights file: implausible name length");
        }
        std::string name(name_len, '\0');
        if (!in.read(name.data(), name_len)) {
            throw IoError("weights file: truncated name");
        }
        const std::uint32_t rank = binary::read_u32(in);
        if (rank > 8) {
            throw IoError("weights file: implausible rank for '" + name + "'");
        }
        Shape shape(rank);
        for (int& d : shape) {
            d = static_cast<int>(binary::read_u32(in));
        }
        std::vector<float> values(shape_size(shape));
        for (float& v : values) {
            v = binary::read_f32(in);
        }
        tensors.push_back({std::move(name), make_param(std::move(shape), std::move(values))});
    }
    return tensors;
}

void load_weights_into(std::istream& in, std::span<const NamedTensor> into) {
    const auto stored = read_weights(in);
    if (stored.size() != into.size()) {
        throw DimensionError("weights file holds " + std::to_string(stored.size()) + " tensors, model expects " +
                             std::to_string(into.size()));
    }
    for (std::size_t i = 0; i < stored.size(); ++i) {
        if (stored[i].name != into[i].name || stored[i].tensor->shape() != into[i].tensor->shape()) {
            throw DimensionError("weights mismatch at '" + into[i].name + "': file has '" + stored[i].name + "' " +
                                 shape_string(stored[i].tensor->shape()));
        }
        auto src = stored[i].tensor->values();
        std::copy(src.begin(), src.end(), into[i].tensor->values().begin());
    }
}

}  // namespace gmedia::nn
