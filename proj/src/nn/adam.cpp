#include "gmedia/nn/adam.hpp"

#include <cmath>

#include "gmedia/errors.hpp"

namespace gmedia::nn {

void adam_step(std::span<const TensorPtr> params, AdamState& state) {
    if (state.first_moment.empty()) {
        for (const auto& p : params) {
            state.first_moment.emplace_back(p->size(), 0.0f);
            state.second_moment.emplace_back(p->size(), 0.0f);
        }
    }
    if (state.first_moment.size() != params.size()) {
        throw DimensionError("adam_step: parameter list changed between steps");
    }
    ++state.step;
    const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t k = 0; k < params.size(); ++k) {
        Tensor& p = *params[k];
        auto& m = state.first_moment[k];
        auto& v = state.second_moment[k];
        if (m.size() != p.size()) {
            throw DimensionError("adam_step: moment buffer does not match parameter");
        }
        const auto grad = std::as_const(p).grad();
        auto w = p.values();
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double g = grad.empty() ? 0.0 : grad[i];
            const double mi = state.beta1 * m[i] + (1.0 - state.beta1) * g;
            const double vi = state.beta2 * v[i] + (1.0 - state.beta2) * g * g;
            m[i] = static_cast<float>(mi);
            v[i] = static_cast<float>(vi);
            const double m_hat = mi / c1;
            const double v_hat = vi / c2;
            w[i] = static_cast<float>(w[i] - state.lr * m_hat / (std::sqrt(v_hat) + state.eps));
        }
    }
}

Tensor init_weights(const Shape& shape, int fan_in, Pcg32& rng) {
    if (fan_in <= 0) {
        throw ArgumentError("init_weights: fan_in must be positive");
    }
    const double bound = std::sqrt(6.0 / fan_in);
    Tensor t(shape);
    for (float& v : t.values()) {
        v = static_cast<float>(rng.uniform(-bound, bound));
    }
    return t;
}

}  // namespace gmedia::nn
