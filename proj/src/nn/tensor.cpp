#include "gmedia/nn/tensor.hpp"

#include <sstream>

#include "gmedia/errors.hpp"

namespace gmedia::nn {

std::size_t shape_size(const Shape& shape) {
    std::size_t n = 1;
    for (int d : shape) {
        if (d < 0) {
            throw DimensionError("negative tensor dimension");
        }
        n *= static_cast<std::size_t>(d);
    }
    return n;
}

std::string shape_string(const Shape& shape) {
    std::ostringstream out;
    out << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        out << (i ? "," : "") << shape[i];
    }
    out << ']';
    return out.str();
}

Tensor::Tensor(Shape shape, float fill) : shape_(std::move(shape)), values_(shape_size(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<float> values)
    : shape_(std::move(shape)), values_(values.begin(), values.end()) {
    if (values_.size() != shape_size(shape_)) {
        throw DimensionError("tensor of shape " + shape_string(shape_) + " given " + std::to_string(values_.size()) +
                             " values");
    }
}

std::span<float> Tensor::grad() {
    if (grad_.empty()) {
        grad_.assign(values_.size(), 0.0f);
    }
    return grad_;
}

TensorPtr make_tensor(Shape shape, float fill) { return std::make_shared<Tensor>(std::move(shape), fill); }

TensorPtr make_tensor(Shape shape, std::vector<float> values) {
    return std::make_shared<Tensor>(std::move(shape), std::move(values));
}

TensorPtr make_param(Shape shape, std::vector<float> values) {
    auto t = make_tensor(std::move(shape), std::move(values));
    t->set_requires_grad(true);
    return t;
}

void Tape::backward(const TensorPtr& loss) {
    if (loss->size() != 1) {
        throw DimensionError("backward needs a scalar loss");
    }
    const float one = 1.0f;
    backward(loss, std::span<const float>(&one, 1));
}

void Tape::backward(const TensorPtr& root, std::span<const float> seed) {
    if (seed.size() != root->size()) {
        throw DimensionError("backward seed has " + std::to_string(seed.size()) + " values for a tensor of shape " +
                             shape_string(root->shape()));
    }
    auto g = root->grad();
    for (std::size_t i = 0; i < seed.size(); ++i) {
        g[i] += seed[i];
    }
    for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) {
        (*it)();
    }
}

}  // namespace gmedia::nn
