#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "gmedia/nn/tensor.hpp"
#include "gmedia/rng.hpp"

namespace gmedia::testing {

using Forward = std::function<nn::TensorPtr(nn::Tape*)>;

struct GradCheck {
    double max_abs_error = 0.0;
    double scale = 0.0;  // largest |gradient| seen, analytic or numeric
    std::vector<std::pair<double, double>> probes;  // (numeric, analytic)

    double relative() const { return max_abs_error / std::max(scale, 1e-6); }
};

inline nn::TensorPtr random_tensor(const nn::Shape& shape, Pcg32& rng, double lo = -1.0, double hi = 1.0,
                                   bool requires_grad = true) {
    std::vector<float> v(nn::shape_size(shape));
    for (float& x : v) {
        x = static_cast<float>(rng.uniform(lo, hi));
    }
    auto t = nn::make_tensor(shape, std::move(v));
    t->set_requires_grad(requires_grad);
    return t;
}

// Compares the taped gradient of <r, f(inputs)> against central differences for every element
// of every listed input. `probe` limits how many elements per input are perturbed.
inline GradCheck check_gradients(const Forward& f, const std::vector<nn::TensorPtr>& inputs, Pcg32& rng,
                                 double eps = 1e-2, std::size_t probe = 0) {
    std::vector<float> r;
    {
        const auto out = f(nullptr);
        r.resize(out->size());
        for (float& x : r) {
            x = static_cast<float>(rng.uniform(-1.0, 1.0));
        }
    }
    const auto project = [&]() {
        const auto out = f(nullptr);
        double s = 0.0;
        for (std::size_t i = 0; i < r.size(); ++i) {
            s += static_cast<double>(r[i]) * out->values()[i];
        }
        return s;
    };

    for (const auto& t : inputs) {
        t->zero_grad();
    }
    nn::Tape tape;
    const auto out = f(&tape);
    tape.backward(out, r);

    GradCheck result;
    for (const auto& t : inputs) {
        const std::vector<float> analytic = t->has_grad()
                                                ? std::vector<float>(t->grad().begin(), t->grad().end())
                                                : std::vector<float>(t->size(), 0.0f);
        const std::size_t n = t->size();
        const std::size_t count = probe == 0 ? n : std::min(probe, n);
        for (std::size_t j = 0; j < count; ++j) {
            const std::size_t i = probe == 0 ? j : static_cast<std::size_t>(rng.below(static_cast<std::uint32_t>(n)));
            const float saved = t->values()[i];
            t->values()[i] = static_cast<float>(saved + eps);
            const double up = project();
            t->values()[i] = static_cast<float>(saved - eps);
            const double down = project();
            t->values()[i] = saved;
            const double numeric = (up - down) / (2 * eps);
            result.probes.emplace_back(numeric, analytic[i]);
            result.max_abs_error = std::max(result.max_abs_error, std::fabs(numeric - analytic[i]));
            result.scale = std::max({result.scale, std::fabs(numeric), std::fabs(static_cast<double>(analytic[i]))});
        }
    }
    return result;
}

}  // namespace gmedia::testing
