#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "common/gradcheck.hpp"
#include "gmedia/models.hpp"
#include "gmedia/nn/ops.hpp"

// Double-precision re-implementation of the network forward passes for a single sample,
// reading weights by name. Used as an independent oracle for finite differences.
namespace gmedia::testing {

struct RefMap {
    int c = 0;
    int h = 0;
    int w = 0;
    std::vector<double> v;

    double& at(int ch, int r, int col) { return v[(static_cast<std::size_t>(ch) * h + r) * w + col]; }
    double at(int ch, int r, int col) const { return v[(static_cast<std::size_t>(ch) * h + r) * w + col]; }
};

struct RefParam {
    nn::Shape shape;
    std::vector<double> v;
};

using RefParams = std::map<std::string, RefParam>;

inline RefParams ref_params(const Model& model) {
    RefParams out;
    for (const auto& p : model.named_parameters()) {
        out[p.name] = {p.tensor->shape(), std::vector<double>(p.tensor->values().begin(), p.tensor->values().end())};
    }
    return out;
}

// Sample `n` of a batched [B, C, H, W] tensor.
inline RefMap ref_sample(const nn::Tensor& t, int n) {
    RefMap m{t.dim(1), t.dim(2), t.dim(3), {}};
    const std::size_t per = static_cast<std::size_t>(m.c) * m.h * m.w;
    m.v.assign(t.values().begin() + static_cast<std::ptrdiff_t>(n * per),
               t.values().begin() + static_cast<std::ptrdiff_t>((n + 1) * per));
    return m;
}

inline RefMap ref_conv(const RefParams& params, const std::string& layer, const RefMap& x, bool relu) {
    const RefParam& wp = params.at(layer + ".weight");
    const RefParam& bp = params.at(layer + ".bias");
    const int out_ch = wp.shape[0];
    const int k = wp.shape[2];
    const int pad = k / 2;
    RefMap y{out_ch, x.h, x.w, std::vector<double>(static_cast<std::size_t>(out_ch) * x.h * x.w)};
    for (int o = 0; o < out_ch; ++o) {
        double* plane = &y.at(o, 0, 0);
        std::fill_n(plane, static_cast<std::size_t>(x.h) * x.w, bp.v[static_cast<std::size_t>(o)]);
        for (int i = 0; i < x.c; ++i) {
            for (int dr = 0; dr < k; ++dr) {
                for (int dc = 0; dc < k; ++dc) {
                    const double wv = wp.v[((static_cast<std::size_t>(o) * x.c + i) * k + dr) * k + dc];
                    for (int r = 0; r < x.h; ++r) {
                        const int rr = r + dr - pad;
                        if (rr < 0 || rr >= x.h) {
                            continue;
                        }
                        for (int c = 0; c < x.w; ++c) {
                            const int cc = c + dc - pad;
                            if (cc >= 0 && cc < x.w) {
                                plane[r * x.w + c] += wv * x.at(i, rr, cc);
                            }
                        }
                    }
                }
            }
        }
    }
    if (relu) {
        for (double& v : y.v) {
            v = std::max(v, 0.0);
        }
    }
    return y;
}

inline RefMap ref_stack(const RefParams& params, const std::string& prefix, int depth, RefMap x, bool relu_last) {
    for (int i = 0; i < depth; ++i) {
        x = ref_conv(params, prefix + "." + std::to_string(i), x, relu_last || i + 1 < depth);
    }
    return x;
}

inline RefMap ref_concat(const RefMap& a, const RefMap& b) {
    RefMap out{a.c + b.c, a.h, a.w, a.v};
    out.v.insert(out.v.end(), b.v.begin(), b.v.end());
    return out;
}

inline RefMap ref_pool4(const RefMap& x) {
    RefMap y{x.c, x.h / 4, x.w / 4, std::vector<double>(static_cast<std::size_t>(x.c) * (x.h / 4) * (x.w / 4), 0.0)};
    for (int ch = 0; ch < x.c; ++ch) {
        for (int r = 0; r < x.h; ++r) {
            for (int c = 0; c < x.w; ++c) {
                y.at(ch, r / 4, c / 4) += x.at(ch, r, c) / 16.0;
            }
        }
    }
    return y;
}

// Three-layer towers, ten-layer trunk, linear 1x1 head.
inline RefMap ref_delta_net(const RefParams& params, const std::string& prefix, const RefMap& state,
                            const RefMap& action) {
    const RefMap s = ref_stack(params, prefix + ".state_tower", 3, state, true);
    const RefMap a = ref_stack(params, prefix + ".action_tower", 3, action, true);
    const RefMap t = ref_stack(params, prefix + ".trunk", 10, ref_concat(s, a), true);
    return ref_stack(params, prefix + ".head", 1, t, false);
}

struct RefScoopDump {
    RefMap scoop;
    RefMap dump;
    RefMap total;
};

// `frozen_scoop` stands in for the top half's output wherever it feeds forward, matching a
// gradient stop at that point.
inline RefScoopDump ref_scoop_dump(const RefParams& params, const RefMap& state, const RefMap& action,
                                   const RefMap* frozen_scoop) {
    RefScoopDump out;
    out.scoop = ref_delta_net(params, "scoop_dump.top", state, action);
    const RefMap& fixed = frozen_scoop ? *frozen_scoop : out.scoop;
    RefMap after = state;
    double sum = 0.0;
    for (std::size_t i = 0; i < after.v.size(); ++i) {
        after.v[i] += fixed.v[i];
        sum += fixed.v[i];
    }
    RefMap mass{1, state.h, state.w, std::vector<double>(state.v.size(), sum / static_cast<double>(state.v.size()))};
    out.dump = ref_delta_net(params, "scoop_dump.bottom", ref_concat(after, mass), action);
    out.total = out.dump;
    for (std::size_t i = 0; i < out.total.v.size(); ++i) {
        out.total.v[i] += fixed.v[i];
    }
    return out;
}

inline double ref_value_net(const RefParams& params, const RefMap& state, const RefMap& goal, const RefMap& action) {
    const RefMap s = ref_stack(params, "value.state_tower", 3, state, true);
    const RefMap g = ref_stack(params, "value.goal_tower", 3, goal, true);
    const RefMap a = ref_stack(params, "value.action_tower", 3, action, true);
    RefMap x = ref_stack(params, "value.trunk", 10, ref_concat(ref_concat(s, g), a), true);
    x = ref_pool4(ref_stack(params, "value.tail_a", 1, x, true));
    x = ref_pool4(ref_stack(params, "value.tail_b", 1, x, true));
    const RefParam& w = params.at("value.dense.weight");
    double y = params.at("value.dense.bias").v[0];
    for (std::size_t i = 0; i < x.v.size(); ++i) {
        y += w.v[i] * x.v[i];
    }
    return y;
}

// Replaces every bias with a uniform draw in [-0.1, 0.1], moving pre-activations off the ReLU kink.
inline void randomize_biases(Model& model, Pcg32& rng) {
    for (const auto& p : model.named_parameters()) {
        if (p.name.ends_with(".bias")) {
            for (float& v : p.tensor->values()) {
                v = static_cast<float>(rng.uniform(-0.1, 0.1));
            }
        }
    }
}

// Central differences of `objective` on the double-precision weights, against the gradient the
// library left on each parameter tensor, for `probes` random entries of every tensor whose name
// starts with `prefix`.
inline GradCheck check_against_reference(const Model& model, const std::function<double(const RefParams&)>& objective,
                                         Pcg32& rng, std::size_t probes, double eps = 1e-6,
                                         const std::string& prefix = "") {
    RefParams params = ref_params(model);
    GradCheck result;
    for (const auto& p : model.named_parameters()) {
        if (p.name.rfind(prefix, 0) != 0) {
            continue;
        }
        const auto grad = std::as_const(*p.tensor).grad();
        auto& values = params.at(p.name).v;
        for (std::size_t k = 0; k < std::min(probes, values.size()); ++k) {
            const std::size_t i = rng.below(static_cast<std::uint32_t>(values.size()));
            const double saved = values[i];
            values[i] = saved + eps;
            const double up = objective(params);
            values[i] = saved - eps;
            const double down = objective(params);
            values[i] = saved;
            const double numeric = (up - down) / (2 * eps);
            const double analytic = grad.empty() ? 0.0 : grad[i];
            result.probes.emplace_back(numeric, analytic);
            result.max_abs_error = std::max(result.max_abs_error, std::fabs(numeric - analytic));
            result.scale = std::max({result.scale, std::fabs(numeric), std::fabs(analytic)});
        }
    }
    return result;
}

inline double dot(const std::vector<float>& r, const RefMap& m, std::size_t offset = 0) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.v.size(); ++i) {
        s += static_cast<double>(r[offset + i]) * m.v[i];
    }
    return s;
}

}  // namespace gmedia::testing
