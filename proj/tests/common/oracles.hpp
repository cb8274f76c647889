#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "gmedia/action.hpp"
#include "gmedia/grid.hpp"
#include "gmedia/nn/tensor.hpp"

namespace gmedia::testing {

// Direct six-loop same-padded cross-correlation, accumulated in double.
inline std::vector<double> naive_conv2d(const nn::Tensor& x, const nn::Tensor& w, const nn::Tensor& b) {
    const int batch = x.dim(0);
    const int in_ch = x.dim(1);
    const int height = x.dim(2);
    const int width = x.dim(3);
    const int out_ch = w.dim(0);
    const int k = w.dim(2);
    const int pad = k / 2;
    std::vector<double> y(static_cast<std::size_t>(batch) * out_ch * height * width);
    for (int n = 0; n < batch; ++n) {
        for (int o = 0; o < out_ch; ++o) {
            for (int r = 0; r < height; ++r) {
                for (int c = 0; c < width; ++c) {
                    double s = b.values()[static_cast<std::size_t>(o)];
                    for (int i = 0; i < in_ch; ++i) {
                        for (int dr = 0; dr < k; ++dr) {
                            for (int dc = 0; dc < k; ++dc) {
                                const int rr = r + dr - pad;
                                const int cc = c + dc - pad;
                                if (rr < 0 || rr >= height || cc < 0 || cc >= width) {
                                    continue;
                                }
                                s += static_cast<double>(
                                         w.values()[((static_cast<std::size_t>(o) * in_ch + i) * k + dr) * k + dc]) *
                                     x.values()[((static_cast<std::size_t>(n) * in_ch + i) * height + rr) * width + cc];
                            }
                        }
                    }
                    y[((static_cast<std::size_t>(n) * out_ch + o) * height + r) * width + c] = s;
                }
            }
        }
    }
    return y;
}

// Per-cell enumeration of the swath split: every cell center within w/2 of the segment with
// projection in [0, 1] is cleared; its angle sign decides scooped versus pushed.
inline std::pair<double, double> split_oracle(const HeightMap& h, const ScoopDumpParams& p, double width_mm) {
    const GridSpec& spec = h.spec();
    const double half = width_mm / spec.cell_size / 2;
    double scooped = 0.0;
    double pushed = 0.0;
    for (int r = 0; r < spec.rows; ++r) {
        for (int c = 0; c < spec.cols; ++c) {
            const double dx = p.end.x - p.start.x;
            const double dy = p.end.y - p.start.y;
            const double t = ((c - p.start.x) * dx + (r - p.start.y) * dy) / (dx * dx + dy * dy);
            if (t < -1e-9 || t > 1 + 1e-9) {
                continue;
            }
            const double dist = std::hypot(c - (p.start.x + t * dx), r - (p.start.y + t * dy));
            if (dist > half + 1e-9) {
                continue;
            }
            const double tc = std::clamp(t, 0.0, 1.0);
            const double angle = p.start_angle + tc * (p.end_angle - p.start_angle);
            (angle >= 0 ? scooped : pushed) += h.at(r, c) * spec.cell_area();
        }
    }
    return {scooped, pushed};
}

}  // namespace gmedia::testing
