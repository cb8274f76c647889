#include "gmedia/nn/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cstring>

#include "gmedia/errors.hpp"

namespace gmedia::nn {
namespace {

using RowMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

bool any_requires_grad(std::initializer_list<const Tensor*> tensors) {
    return std::any_of(tensors.begin(), tensors.end(), [](const Tensor* t) { return t->requires_grad(); });
}

void require_rank(const TensorPtr& t, int rank, const char* op) {
    if (t->rank() != rank) {
        throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                             shape_string(t->shape()));
    }
}

TensorPtr make_output(Shape shape, bool requires_grad) {
    auto out = make_tensor(std::move(shape));
    out->set_requires_grad(requires_grad);
    return out;
}

// Unrolls 3x3 zero-padded neighborhoods: col[(c*9 + ky*3 + kx), y*W + x] = x[c, y+ky-1, x+kx-1].
void im2col3(const float* x, int channels, int height, int width, float* col) {
    const std::size_t hw = static_cast<std::size_t>(height) * width;
    for (int c = 0; c < channels; ++c) {
        const float* plane = x + static_cast<std::size_t>(c) * hw;
        for (int ky = 0; ky < 3; ++ky) {
            for (int kx = 0; kx < 3; ++kx) {
                float* row = col + static_cast<std::size_t>((c * 3 + ky) * 3 + kx) * hw;
                const int dy = ky - 1;
                const int dx = kx - 1;
                for (int y = 0; y < height; ++y) {
                    float* dst = row + static_cast<std::size_t>(y) * width;
                    const int sy = y + dy;
                    if (sy < 0 || sy >= height) {
                        std::fill(dst, dst + width, 0.0f);
                        continue;
                    }
                    const float* src = plane + static_cast<std::size_t>(sy) * width;
                    if (dx < 0) {
                        dst[0] = 0.0f;
                        std::memcpy(dst + 1, src, sizeof(float) * static_cast<std::size_t>(width - 1));
                    } else if (dx == 0) {
                        std::memcpy(dst, src, sizeof(float) * static_cast<std::size_t>(width));
                    } else {
                        std::memcpy(dst, src + 1, sizeof(float) * static_cast<std::size_t>(width - 1));
                        dst[width - 1] = 0.0f;
                    }
                }
            }
        }
    }
}

// Adjoint of im2col3: scatters (accumulates) columns back onto the image gradient.
void col2im3(const float* col, int channels, int height, int width, float* dx_image) {
    const std::size_t hw = static_cast<std::size_t>(height) * width;
    for (int c = 0; c < channels; ++c) {
        float* plane = dx_image + static_cast<std::size_t>(c) * hw;
        for (int ky = 0; ky < 3; ++ky) {
            for (int kx = 0; kx < 3; ++kx) {
                const float* row = col + static_cast<std::size_t>((c * 3 + ky) * 3 + kx) * hw;
                const int dy = ky - 1;
                const int dx = kx - 1;
                for (int y = 0; y < height; ++y) {
                    const int sy = y + dy;
                    if (sy < 0 || sy >= height) {
                        continue;
                    }
                    const float* src = row + static_cast<std::size_t>(y) * width;
                    float* dst = plane + static_cast<std::size_t>(sy) * width;
                    const int x0 = std::max(0, -dx);
                    const int x1 = std::min(width, width - dx);
                    for (int x = x0; x < x1; ++x) {
                        dst[x + dx] += src[x];
                    }
                }
            }
        }
    }
}

FloatBuffer& scratch(int slot, std::size_t size) {
    thread_local FloatBuffer buffers[2];
    auto& buffer = buffers[slot];
    if (buffer.size() < size) {
        buffer.resize(size);
    }
    return buffer;
}

}  // namespace

TensorPtr conv2d(Tape* tape, const TensorPtr& x, const TensorPtr& weight, const TensorPtr& bias) {
    require_rank(x, 4, "conv2d input");
    require_rank(weight, 4, "conv2d weight");
    require_rank(bias, 1, "conv2d bias");
    const int batch = x->dim(0);
    const int in_ch = x->dim(1);
    const int height = x->dim(2);
    const int width = x->dim(3);
    const int out_ch = weight->dim(0);
    const int k = weight->dim(2);
    if (weight->dim(1) != in_ch || weight->dim(3) != k || (k != 1 && k != 3) || bias->dim(0) != out_ch) {
        throw DimensionError("conv2d: input " + shape_string(x->shape()) + " incompatible with weight " +
                             shape_string(weight->shape()) + " / bias " + shape_string(bias->shape()));
    }
    const int hw = height * width;
    const int inner = in_ch * k * k;
    const bool track = tape != nullptr && any_requires_grad({x.get(), weight.get(), bias.get()});
    auto out = make_output({batch, out_ch, height, width}, track);

    const ConstMatrixMap w(weight->data(), out_ch, inner);
    const Eigen::Map<const Eigen::VectorXf> b(bias->data(), out_ch);
    for (int n = 0; n < batch; ++n) {
        const float* image = x->data() + static_cast<std::size_t>(n) * in_ch * hw;
        const float* cols = image;
        if (k == 3) {
            auto& buffer = scratch(0, static_cast<std::size_t>(inner) * hw);
            im2col3(image, in_ch, height, width, buffer.data());
            cols = buffer.data();
        }
        MatrixMap y(out->data() + static_cast<std::size_t>(n) * out_ch * hw, out_ch, hw);
        y.noalias() = w * ConstMatrixMap(cols, inner, hw);
        y.colwise() += b;
    }

    if (track) {
        tape->record([x, weight, bias, out, batch, in_ch, height, width, out_ch, k, hw, inner]() {
            if (!out->has_grad()) {
                return;
            }
            const ConstMatrixMap w(weight->data(), out_ch, inner);
            for (int n = 0; n < batch; ++n) {
                const ConstMatrixMap dy(out->grad().data() + static_cast<std::size_t>(n) * out_ch * hw, out_ch, hw);
                const float* image = x->data() + static_cast<std::size_t>(n) * in_ch * hw;
                if (weight->requires_grad()) {
                    const float* cols = image;
                    if (k == 3) {
                        auto& buffer = scratch(0, static_cast<std::size_t>(inner) * hw);
                        im2col3(image, in_ch, height, width, buffer.data());
                        cols = buffer.data();
                    }
                    MatrixMap dw(weight->grad().data(), out_ch, inner);
                    dw.noalias() += dy * ConstMatrixMap(cols, inner, hw).transpose();
                }
                if (bias->requires_grad()) {
                    Eigen::Map<Eigen::VectorXf> db(bias->grad().data(), out_ch);
                    db += dy.rowwise().sum();
                }
                if (x->requires_grad()) {
                    float* dx_image = x->grad().data() + static_cast<std::size_t>(n) * in_ch * hw;
                    if (k == 3) {
                        auto& buffer = scratch(1, static_cast<std::size_t>(inner) * hw);
                        MatrixMap dcols(buffer.data(), inner, hw);
                        dcols.noalias() = w.transpose() * dy;
                        col2im3(buffer.data(), in_ch, height, width, dx_image);
                    } else {
                        MatrixMap dx(dx_image, inner, hw);
                        dx.noalias() += w.transpose() * dy;
                    }
                }
            }
        });
    }
    return out;
}

TensorPtr relu(Tape* tape, const TensorPtr& x) {
    const bool track = tape != nullptr && x->requires_grad();
    auto out = make_output(x->shape(), track);
    const auto in = x->values();
    auto o = out->values();
    for (std::size_t i = 0; i < in.size(); ++i) {
        o[i] = in[i] > 0.0f ? in[i] : 0.0f;
    }
    if (track) {
        tape->record([x, out]() {
            if (!out->has_grad()) {
                return;
            }
            const auto dy = std::as_const(*out).grad();
            const auto y = std::as_const(*out).values();
            auto dx = x->grad();
            for (std::size_t i = 0; i < dy.size(); ++i) {
                if (y[i] > 0.0f) {
                    dx[i] += dy[i];
                }
            }
        });
    }
    return out;
}

TensorPtr avg_pool_4x4(Tape* tape, const TensorPtr& x) {
    require_rank(x, 4, "avg_pool_4x4");
    const int batch = x->dim(0);
    const int channels = x->dim(1);
    const int height = x->dim(2);
    const int width = x->dim(3);
    if (height % 4 != 0 || width % 4 != 0) {
        throw DimensionError("avg_pool_4x4: spatial dims " + shape_string(x->shape()) + " not divisible by 4");
    }
    const int oh = height / 4;
    const int ow = width / 4;
    const bool track = tape != nullptr && x->requires_grad();
    auto out = make_output({batch, channels, oh, ow}, track);
    const float* in = x->data();
    float* o = out->data();
    for (int p = 0; p < batch * channels; ++p) {
        const float* plane = in + static_cast<std::size_t>(p) * height * width;
        float* dst = o + static_cast<std::size_t>(p) * oh * ow;
        for (int y = 0; y < oh; ++y) {
            for (int xx = 0; xx < ow; ++xx) {
                float sum = 0.0f;
                for (int dy = 0; dy < 4; ++dy) {
                    for (int dx = 0; dx < 4; ++dx) {
                        sum += plane[(4 * y + dy) * width + 4 * xx + dx];
                    }
                }
                dst[y * ow + xx] = sum / 16.0f;
            }
        }
    }
    if (track) {
        tape->record([x, out, batch, channels, height, width, oh, ow]() {
            if (!out->has_grad()) {
                return;
            }
            const float* dy_all = std::as_const(*out).grad().data();
            float* dx_all = x->grad().data();
            for (int p = 0; p < batch * channels; ++p) {
                const float* dy = dy_all + static_cast<std::size_t>(p) * oh * ow;
                float* dx = dx_all + static_cast<std::size_t>(p) * height * width;
                for (int y = 0; y < height; ++y) {
                    for (int xx = 0; xx < width; ++xx) {
                        dx[y * width + xx] += dy[(y / 4) * ow + xx / 4] / 16.0f;
                    }
                }
            }
        });
    }
    return out;
}

TensorPtr dense(Tape* tape, const TensorPtr& x, const TensorPtr& weight, const TensorPtr& bias) {
    require_rank(x, 2, "dense input");
    require_rank(weight, 2, "dense weight");
    require_rank(bias, 1, "dense bias");
    const int batch = x->dim(0);
    const int features = x->dim(1);
    const int outputs = weight->dim(0);
    if (weight->dim(1) != features || bias->dim(0) != outputs) {
        throw DimensionError("dense: input " + shape_string(x->shape()) + " incompatible with weight " +
                             shape_string(weight->shape()));
    }
    const bool track = tape != nullptr && any_requires_grad({x.get(), weight.get(), bias.get()});
    auto out = make_output({batch, outputs}, track);
    const ConstMatrixMap xm(x->data(), batch, features);
    const ConstMatrixMap wm(weight->data(), outputs, features);
    MatrixMap ym(out->data(), batch, outputs);
    ym.noalias() = xm * wm.transpose();
    ym.rowwise() += Eigen::Map<const Eigen::RowVectorXf>(bias->data(), outputs);
    if (track) {
        tape->record([x, weight, bias, out, batch, features, outputs]() {
            if (!out->has_grad()) {
                return;
            }
            const ConstMatrixMap dy(std::as_const(*out).grad().data(), batch, outputs);
            if (weight->requires_grad()) {
                MatrixMap dw(weight->grad().data(), outputs, features);
                dw.noalias() += dy.transpose() * ConstMatrixMap(x->data(), batch, features);
            }
            if (bias->requires_grad()) {
                Eigen::Map<Eigen::RowVectorXf> db(bias->grad().data(), outputs);
                db += dy.colwise().sum();
            }
            if (x->requires_grad()) {
                MatrixMap dx(x->grad().data(), batch, features);
                dx.noalias() += dy * ConstMatrixMap(weight->data(), outputs, features);
            }
        });
    }
    return out;
}

TensorPtr flatten(Tape* tape, const TensorPtr& x) {
    if (x->rank() < 1) {
        throw DimensionError("flatten: scalar input");
    }
    const int batch = x->dim(0);
    const int rest = batch == 0 ? 0 : static_cast<int>(x->size() / static_cast<std::size_t>(batch));
    const bool track = tape != nullptr && x->requires_grad();
    auto out = make_output({batch, rest}, track);
    std::copy(x->values().begin(), x->values().end(), out->values().begin());
    if (track) {
        tape->record([x, out]() {
            if (!out->has_grad()) {
                return;
            }
            const auto dy = std::as_const(*out).grad();
            auto dx = x->grad();
            for (std::size_t i = 0; i < dy.size(); ++i) {
                dx[i] += dy[i];
            }
        });
    }
    return out;
}

TensorPtr concat_channels(Tape* tape, const TensorPtr& a, const TensorPtr& b) {
    require_rank(a, 4, "concat_channels");
    require_rank(b, 4, "concat_channels");
    if (a->dim(0) != b->dim(0) || a->dim(2) != b->dim(2) || a->dim(3) != b->dim(3)) {
        throw DimensionError("concat_channels: " + shape_string(a->shape()) + " vs " + shape_string(b->shape()));
    }
    const int batch = a->dim(0);
    const std::size_t plane = static_cast<std::size_t>(a->dim(2)) * a->dim(3);
    const std::size_t na = static_cast<std::size_t>(a->dim(1)) * plane;
    const std::size_t nb = static_cast<std::size_t>(b->dim(1)) * plane;
    const bool track = tape != nullptr && any_requires_grad({a.get(), b.get()});
    auto out = make_output({batch, a->dim(1) + b->dim(1), a->dim(2), a->dim(3)}, track);
    for (int n = 0; n < batch; ++n) {
        float* dst = out->data() + static_cast<std::size_t>(n) * (na + nb);
        std::copy_n(a->data() + n * na, na, dst);
        std::copy_n(b->data() + n * nb, nb, dst + na);
    }
    if (track) {
        tape->record([a, b, out, batch, na, nb]() {
            if (!out->has_grad()) {
                return;
            }
            const float* dy = std::as_const(*out).grad().data();
            for (int n = 0; n < batch; ++n) {
                const float* src = dy + static_cast<std::size_t>(n) * (na + nb);
                if (a->requires_grad()) {
                    float* da = a->grad().data() + n * na;
                    for (std::size_t i = 0; i < na; ++i) {
                        da[i] += src[i];
                    }
                }
                if (b->requires_grad()) {
                    float* db = b->grad().data() + n * nb;
                    for (std::size_t i = 0; i < nb; ++i) {
                        db[i] += src[na + i];
                    }
                }
            }
        });
    }
    return out;
}

TensorPtr add(Tape* tape, const TensorPtr& a, const TensorPtr& b) {
    if (a->shape() != b->shape()) {
        throw DimensionError("add: " + shape_string(a->shape()) + " vs " + shape_string(b->shape()));
    }
    const bool track = tape != nullptr && any_requires_grad({a.get(), b.get()});
    auto out = make_output(a->shape(), track);
    const auto va = a->values();
    const auto vb = b->values();
    auto o = out->values();
    for (std::size_t i = 0; i < o.size(); ++i) {
        o[i] = va[i] + vb[i];
    }
    if (track) {
        tape->record([a, b, out]() {
            if (!out->has_grad()) {
                return;
            }
            const auto dy = std::as_const(*out).grad();
            for (const auto& t : {a, b}) {
                if (!t->requires_grad()) {
                    continue;
                }
                auto dt = t->grad();
                for (std::size_t i = 0; i < dy.size(); ++i) {
                    dt[i] += dy[i];
                }
            }
        });
    }
    return out;
}

TensorPtr stop_gradient(const TensorPtr& x) {
    auto out = make_tensor(x->shape(), std::vector<float>(x->values().begin(), x->values().end()));
    out->set_requires_grad(false);
    return out;
}

TensorPtr spatial_sum_channel(Tape* tape, const TensorPtr& x) {
    require_rank(x, 4, "spatial_sum_channel");
    const int batch = x->dim(0);
    const std::size_t per_sample = x->size() / static_cast<std::size_t>(std::max(batch, 1));
    const std::size_t plane = static_cast<std::size_t>(x->dim(2)) * x->dim(3);
    const bool track = tape != nullptr && x->requires_grad();
    auto out = make_output({batch, 1, x->dim(2), x->dim(3)}, track);
    for (int n = 0; n < batch; ++n) {
        const float* src = x->data() + n * per_sample;
        double sum = 0.0;
        for (std::size_t i = 0; i < per_sample; ++i) {
            sum += src[i];
        }
        const auto mean = static_cast<float>(sum / static_cast<double>(plane));
        std::fill_n(out->data() + n * plane, plane, mean);
    }
    if (track) {
        tape->record([x, out, batch, per_sample, plane]() {
            if (!out->has_grad()) {
                return;
            }
            const float* dy = std::as_const(*out).grad().data();
            float* dx = x->grad().data();
            for (int n = 0; n < batch; ++n) {
                double sum = 0.0;
                for (std::size_t i = 0; i < plane; ++i) {
                    sum += dy[n * plane + i];
                }
                const auto g = static_cast<float>(sum / static_cast<double>(plane));
                for (std::size_t i = 0; i < per_sample; ++i) {
                    dx[n * per_sample + i] += g;
                }
            }
        });
    }
    return out;
}

TensorPtr l2_loss(Tape* tape, const TensorPtr& pred, const TensorPtr& target) {
    if (pred->shape() != target->shape()) {
        throw DimensionError("l2_loss: " + shape_string(pred->shape()) + " vs " + shape_string(target->shape()));
    }
    const auto p = pred->values();
    const auto t = target->values();
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double d = static_cast<double>(p[i]) - t[i];
        sum += d * d;
    }
    const double n = static_cast<double>(p.size());
    const bool track = tape != nullptr && pred->requires_grad();
    auto out = make_output({1}, track);
    out->values()[0] = static_cast<float>(sum / n);
    if (track) {
        tape->record([pred, target, out, n]() {
            if (!out->has_grad()) {
                return;
            }
            const float scale = static_cast<float>(2.0 / n) * std::as_const(*out).grad()[0];
            const auto p = pred->values();
            const auto t = target->values();
            auto dp = pred->grad();
            for (std::size_t i = 0; i < p.size(); ++i) {
                dp[i] += scale * (p[i] - t[i]);
            }
        });
    }
    return out;
}

}  // namespace gmedia::nn
