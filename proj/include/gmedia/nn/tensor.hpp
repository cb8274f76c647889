#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <new>
#include <span>
#include <string>
#include <vector>

namespace gmedia::nn {

using Shape = std::vector<int>;

/// 64-byte aligned storage; vectorized kernels then sum in the same order for every allocation.
template <class T>
struct AlignedAllocator {
    using value_type = T;
    static constexpr std::align_val_t kAlignment{64};

    AlignedAllocator() = default;
    template <class U>
    AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

    T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlignment)); }
    void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlignment); }

    template <class U>
    bool operator==(const AlignedAllocator<U>&) const noexcept {
        return true;
    }
};

using FloatBuffer = std::vector<float, AlignedAllocator<float>>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Dense f32 array with an optional gradient buffer of the same shape.
/// The gradient is allocated (zeroed) the first time it is requested for writing.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, float fill = 0.0f);
    Tensor(Shape shape, std::vector<float> values);

    const Shape& shape() const { return shape_; }
    int rank() const { return static_cast<int>(shape_.size()); }
    int dim(int axis) const { return shape_[static_cast<std::size_t>(axis)]; }
    std::size_t size() const { return values_.size(); }

    std::span<float> values() { return values_; }
    std::span<const float> values() const { return values_; }
    float* data() { return values_.data(); }
    const float* data() const { return values_.data(); }
    float item() const { return values_.at(0); }

    bool has_grad() const { return !grad_.empty(); }
    /// Mutable gradient; allocates zeros on first use.
    std::span<float> grad();
    /// Read-only gradient; empty when never allocated (i.e. all zeros).
    std::span<const float> grad() const { return grad_; }
    void zero_grad() { grad_.clear(); }

    bool requires_grad() const { return requires_grad_; }
    void set_requires_grad(bool value) { requires_grad_ = value; }

private:
    Shape shape_;
    FloatBuffer values_;
    FloatBuffer grad_;
    bool requires_grad_ = false;
};

using TensorPtr = std::shared_ptr<Tensor>;

TensorPtr make_tensor(Shape shape, float fill = 0.0f);
TensorPtr make_tensor(Shape shape, std::vector<float> values);
/// Trainable leaf: requires_grad is set.
TensorPtr make_param(Shape shape, std::vector<float> values);

/// Records backward closures in execution order and replays them in reverse.
class Tape {
public:
    void record(std::function<void()> backward) { steps_.push_back(std::move(backward)); }

    /// Seeds d(loss)/d(loss) = 1 and propagates. `loss` must hold a single value.
    void backward(const TensorPtr& loss);
    /// Seeds root's gradient with `seed` (same size as root) and propagates.
    void backward(const TensorPtr& root, std::span<const float> seed);

    std::size_t size() const { return steps_.size(); }
    void clear() { steps_.clear(); }

private:
    std::vector<std::function<void()>> steps_;
};

}  // namespace gmedia::nn
