// Copyright 2026 The GNSS Sentinel Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "gnss/cnn/layers.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstring>

#include "gnss/core/error.hpp"

namespace gnss::cnn {

namespace {

template <class T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class T>
using AlignedVec = std::vector<T, Eigen::aligned_allocator<T>>;

template <class T>
struct Scratch {
    AlignedVec<T> a, b, c;
};

template <class T>
Scratch<T>& scratch() {
    thread_local Scratch<T> s;
    return s;
}

template <class T>
const T* stage(AlignedVec<T>& buf, const T* src, std::size_t n) {
    buf.resize(n);
    std::memcpy(buf.data(), src, n * sizeof(T));
    return buf.data();
}

// C (m x n) = op(A) * op(B), or += when `accumulate`; all operands row-major,
// A stored (m x k) or (k x m) when transposed, B (k x n) or (n x k).
// Eigen chooses SIMD peeling from the run-time address of each operand, so
// the rounding of a product would depend on where the allocator placed the
// buffers. Copying into aligned scratch makes every call take the same path.
template <class T>
void matmul(T* C, std::size_t m, std::size_t n, std::size_t k, const T* A, bool trans_a, const T* B, bool trans_b,
            bool accumulate) {
    using AMap = Eigen::Map<const RowMat<T>, Eigen::AlignedMax>;
    auto& s = scratch<T>();
    const T* a = stage(s.a, A, m * k);
    const T* b = stage(s.b, B, k * n);
    s.c.resize(m * n);
    Eigen::Map<RowMat<T>, Eigen::AlignedMax> c(s.c.data(), m, n);
    const AMap am(a, trans_a ? k : m, trans_a ? m : k);
    const AMap bm(b, trans_b ? n : k, trans_b ? k : n);
    if (trans_a && trans_b) c.noalias() = am.transpose() * bm.transpose();
    else if (trans_a) c.noalias() = am.transpose() * bm;
    else if (trans_b) c.noalias() = am * bm.transpose();
    else c.noalias() = am * bm;
    if (accumulate) {
        for (std::size_t i = 0; i < m * n; ++i) C[i] += s.c[i];
    } else {
        std::memcpy(C, s.c.data(), m * n * sizeof(T));
    }
}

// col rows are (channel, ky, kx), columns are output positions.
template <class T>
void im2col(const T* x, std::size_t C, std::size_t H, std::size_t W, std::size_t k, std::size_t s, std::size_t p,
            std::size_t Ho, std::size_t Wo, T* col) {
    const std::ptrdiff_t h = static_cast<std::ptrdiff_t>(H), w = static_cast<std::ptrdiff_t>(W);
    for (std::size_t c = 0; c < C; ++c)
        for (std::size_t ky = 0; ky < k; ++ky)
            for (std::size_t kx = 0; kx < k; ++kx) {
                T* dst = col + ((c * k + ky) * k + kx) * Ho * Wo;
                const T* plane = x + c * H * W;
                for (std::size_t oy = 0; oy < Ho; ++oy) {
                    const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * s + ky) - static_cast<std::ptrdiff_t>(p);
                    T* row = dst + oy * Wo;
                    if (iy < 0 || iy >= h) {
                        std::fill(row, row + Wo, T(0));
                        continue;
                    }
                    const T* src = plane + iy * w;
                    for (std::size_t ox = 0; ox < Wo; ++ox) {
                        const std::ptrdiff_t ix =
                            static_cast<std::ptrdiff_t>(ox * s + kx) - static_cast<std::ptrdiff_t>(p);
                        row[ox] = (ix >= 0 && ix < w) ? src[ix] : T(0);
                    }
                }
            }
}

template <class T>
void col2im(const T* col, std::size_t C, std::size_t H, std::size_t W, std::size_t k, std::size_t s, std::size_t p,
            std::size_t Ho, std::size_t Wo, T* x) {
    const std::ptrdiff_t h = static_cast<std::ptrdiff_t>(H), w = static_cast<std::ptrdiff_t>(W);
    for (std::size_t c = 0; c < C; ++c)
        for (std::size_t ky = 0; ky < k; ++ky)
            for (std::size_t kx = 0; kx < k; ++kx) {
                const T* src = col + ((c * k + ky) * k + kx) * Ho * Wo;
                T* plane = x + c * H * W;
                for (std::size_t oy = 0; oy < Ho; ++oy) {
                    const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * s + ky) - static_cast<std::ptrdiff_t>(p);
                    if (iy < 0 || iy >= h) continue;
                    T* dst = plane + iy * w;
                    const T* row = src + oy * Wo;
                    for (std::size_t ox = 0; ox < Wo; ++ox) {
                        const std::ptrdiff_t ix =
                            static_cast<std::ptrdiff_t>(ox * s + kx) - static_cast<std::ptrdiff_t>(p);
                        if (ix >= 0 && ix < w) dst[ix] += row[ox];
                    }
                }
            }
}

template <class T>
void require_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* who) {
    if (!a.same_shape(b))
        throw DataError(std::string(who) + ": gradient shape " + a.shape_string() + " does not match " +
                        b.shape_string());
}

}  // namespace

// --- Conv2d -----------------------------------------------------------------

template <class T>
Conv2d<T>::Conv2d(std::size_t cin, std::size_t cout, std::size_t k, std::size_t s, std::size_t p, bool b)
    : in_channels(cin), out_channels(cout), kernel(k), stride(s), pad(p), has_bias(b) {
    if (cin == 0 || cout == 0 || k == 0 || s == 0) throw UsageError("Conv2d: dimensions must be positive");
    weight.assign(cout * cin * k * k, T(0));
    grad_weight.assign(weight.size(), T(0));
    if (b) {
        bias.assign(cout, T(0));
        grad_bias.assign(cout, T(0));
    }
}

template <class T>
void Conv2d<T>::init(Rng& rng) {
    const double sd = std::sqrt(2.0 / static_cast<double>(in_channels * kernel * kernel));
    for (auto& v : weight) v = static_cast<T>(rng.normal(0.0, sd));
    std::fill(bias.begin(), bias.end(), T(0));
}

template <class T>
Tensor<T> Conv2d<T>::forward(const Tensor<T>& x) {
    if (x.c != in_channels)
        throw DataError("Conv2d: expected " + std::to_string(in_channels) + " input channels, got " + x.shape_string());
    if (x.h + 2 * pad < kernel || x.w + 2 * pad < kernel) throw DataError("Conv2d: input smaller than kernel");
    input_ = x;
    const std::size_t ho = out_extent(x.h), wo = out_extent(x.w), P = ho * wo;
    const std::size_t K = in_channels * kernel * kernel;
    Tensor<T> y(x.n, out_channels, ho, wo);
    std::vector<T> col(K * P);
    for (std::size_t i = 0; i < x.n; ++i) {
        im2col(x.sample(i), in_channels, x.h, x.w, kernel, stride, pad, ho, wo, col.data());
        T* yi = y.sample(i);
        matmul(yi, out_channels, P, K, weight.data(), false, col.data(), false, false);
        if (has_bias)
            for (std::size_t o = 0; o < out_channels; ++o)
                for (std::size_t q = 0; q < P; ++q) yi[o * P + q] += bias[o];
    }
    return y;
}

template <class T>
Tensor<T> Conv2d<T>::backward(const Tensor<T>& dy) {
    const Tensor<T>& x = input_;
    const std::size_t ho = out_extent(x.h), wo = out_extent(x.w), P = ho * wo;
    if (dy.n != x.n || dy.c != out_channels || dy.h != ho || dy.w != wo)
        throw DataError("Conv2d: gradient shape " + dy.shape_string() + " does not match output");
    const std::size_t K = in_channels * kernel * kernel;
    Tensor<T> dx(x.n, x.c, x.h, x.w);
    std::vector<T> col(K * P), dcol(K * P);
    for (std::size_t i = 0; i < x.n; ++i) {
        im2col(x.sample(i), in_channels, x.h, x.w, kernel, stride, pad, ho, wo, col.data());
        const T* dyi = dy.sample(i);
        matmul(grad_weight.data(), out_channels, K, P, dyi, false, col.data(), true, true);
        if (has_bias)
            for (std::size_t o = 0; o < out_channels; ++o) {
                T acc = 0;
                for (std::size_t q = 0; q < P; ++q) acc += dyi[o * P + q];
                grad_bias[o] += acc;
            }
        matmul(dcol.data(), K, P, out_channels, weight.data(), true, dyi, false, false);
        col2im(dcol.data(), in_channels, x.h, x.w, kernel, stride, pad, ho, wo, dx.sample(i));
    }
    return dx;
}

template <class T>
void Conv2d<T>::collect(const std::string& prefix, std::vector<ParamRef<T>>& out) {
    out.push_back({prefix + ".weight", &weight, &grad_weight});
    if (has_bias) out.push_back({prefix + ".bias", &bias, &grad_bias});
}

// --- BatchNorm2d --------------------------------------------------------------

template <class T>
BatchNorm2d<T>::BatchNorm2d(std::size_t c, double m, double e)
    : channels(c),
      momentum(m),
      eps(e),
      gamma(c, T(1)),
      beta(c, T(0)),
      grad_gamma(c, T(0)),
      grad_beta(c, T(0)),
      running_mean(c, T(0)),
      running_var(c, T(1)) {}

template <class T>
Tensor<T> BatchNorm2d<T>::forward(const Tensor<T>& x, bool training) {
    if (x.c != channels) throw DataError("BatchNorm2d: channel mismatch, input " + x.shape_string());
    const std::size_t plane = x.h * x.w;
    const double m = static_cast<double>(x.n * plane);
    if (training && m < 2) throw DataError("BatchNorm2d: training needs more than one value per channel");
    Tensor<T> y(x.n, x.c, x.h, x.w);
    xhat_ = Tensor<T>(x.n, x.c, x.h, x.w);
    inv_std_.assign(channels, 0.0);
    trained_pass_ = training;
    for (std::size_t c = 0; c < channels; ++c) {
        double mean, var;
        if (training) {
            double s = 0.0;
            for (std::size_t i = 0; i < x.n; ++i) {
                const T* p = x.sample(i) + c * plane;
                for (std::size_t j = 0; j < plane; ++j) s += p[j];
            }
            mean = s / m;
            double ss = 0.0;
            for (std::size_t i = 0; i < x.n; ++i) {
                const T* p = x.sample(i) + c * plane;
                for (std::size_t j = 0; j < plane; ++j) ss += (p[j] - mean) * (p[j] - mean);
            }
            var = ss / m;
            running_mean[c] = static_cast<T>((1.0 - momentum) * running_mean[c] + momentum * mean);
            running_var[c] = static_cast<T>((1.0 - momentum) * running_var[c] + momentum * var * m / (m - 1.0));
        } else {
            mean = running_mean[c];
            var = running_var[c];
        }
        const double inv = 1.0 / std::sqrt(var + eps);
        inv_std_[c] = inv;
        for (std::size_t i = 0; i < x.n; ++i) {
            const T* p = x.sample(i) + c * plane;
            T* xh = xhat_.sample(i) + c * plane;
            T* q = y.sample(i) + c * plane;
            for (std::size_t j = 0; j < plane; ++j) {
                xh[j] = static_cast<T>((p[j] - mean) * inv);
                q[j] = gamma[c] * xh[j] + beta[c];
            }
        }
    }
    return y;
}

template <class T>
Tensor<T> BatchNorm2d<T>::backward(const Tensor<T>& dy) {
    require_same_shape(dy, xhat_, "BatchNorm2d");
    const std::size_t plane = dy.h * dy.w;
    const double m = static_cast<double>(dy.n * plane);
    Tensor<T> dx(dy.n, dy.c, dy.h, dy.w);
    for (std::size_t c = 0; c < channels; ++c) {
        double sum_dy = 0.0, sum_dy_xhat = 0.0;
        for (std::size_t i = 0; i < dy.n; ++i) {
            const T* g = dy.sample(i) + c * plane;
            const T* xh = xhat_.sample(i) + c * plane;
            for (std::size_t j = 0; j < plane; ++j) {
                sum_dy += g[j];
                sum_dy_xhat += static_cast<double>(g[j]) * xh[j];
            }
        }
        grad_gamma[c] += static_cast<T>(sum_dy_xhat);
        grad_beta[c] += static_cast<T>(sum_dy);
        const double scale = gamma[c] * inv_std_[c];
        for (std::size_t i = 0; i < dy.n; ++i) {
            const T* g = dy.sample(i) + c * plane;
            const T* xh = xhat_.sample(i) + c * plane;
            T* out = dx.sample(i) + c * plane;
            if (trained_pass_) {
                for (std::size_t j = 0; j < plane; ++j)
                    out[j] = static_cast<T>(scale * (g[j] - sum_dy / m - xh[j] * sum_dy_xhat / m));
            } else {
                for (std::size_t j = 0; j < plane; ++j) out[j] = static_cast<T>(scale * g[j]);
            }
        }
    }
    return dx;
}

template <class T>
void BatchNorm2d<T>::collect(const std::string& prefix, std::vector<ParamRef<T>>& out) {
    out.push_back({prefix + ".gamma", &gamma, &grad_gamma});
    out.push_back({prefix + ".beta", &beta, &grad_beta});
}

template <class T>
void BatchNorm2d<T>::collect_buffers(const std::string& prefix, std::vector<BufferRef<T>>& out) {
    out.push_back({prefix + ".running_mean", &running_mean});
    out.push_back({prefix + ".running_var", &running_var});
}

// --- ReLU, pooling, linear ----------------------------------------------------

template <class T>
Tensor<T> Relu<T>::forward(const Tensor<T>& x) {
    output_ = x;
    for (auto& v : output_.data) v = v > T(0) ? v : T(0);
    return output_;
}

template <class T>
Tensor<T> Relu<T>::backward(const Tensor<T>& dy) {
    require_same_shape(dy, output_, "Relu");
    Tensor<T> dx = dy;
    for (std::size_t i = 0; i < dx.size(); ++i)
        if (!(output_.data[i] > T(0))) dx.data[i] = T(0);
    return dx;
}

template <class T>
Tensor<T> GlobalAvgPool<T>::forward(const Tensor<T>& x) {
    h_ = x.h;
    w_ = x.w;
    const std::size_t plane = x.h * x.w;
    Tensor<T> y(x.n, x.c, 1, 1);
    for (std::size_t i = 0; i < x.n; ++i)
        for (std::size_t c = 0; c < x.c; ++c) {
            const T* p = x.sample(i) + c * plane;
            double s = 0.0;
            for (std::size_t j = 0; j < plane; ++j) s += p[j];
            y.at(i, c, 0, 0) = static_cast<T>(s / static_cast<double>(plane));
        }
    return y;
}

template <class T>
Tensor<T> GlobalAvgPool<T>::backward(const Tensor<T>& dy) {
    const std::size_t plane = h_ * w_;
    Tensor<T> dx(dy.n, dy.c, h_, w_);
    const T scale = static_cast<T>(1.0 / static_cast<double>(plane));
    for (std::size_t i = 0; i < dy.n; ++i)
        for (std::size_t c = 0; c < dy.c; ++c) {
            T* p = dx.sample(i) + c * plane;
            std::fill(p, p + plane, dy.at(i, c, 0, 0) * scale);
        }
    return dx;
}

template <class T>
Linear<T>::Linear(std::size_t in, std::size_t out)
    : in_features(in),
      out_features(out),
      weight(in * out, T(0)),
      bias(out, T(0)),
      grad_weight(in * out, T(0)),
      grad_bias(out, T(0)) {
    if (in == 0 || out == 0) throw UsageError("Linear: dimensions must be positive");
}

template <class T>
void Linear<T>::init(Rng& rng) {
    const double a = 1.0 / std::sqrt(static_cast<double>(in_features));
    for (auto& v : weight) v = static_cast<T>(rng.uniform(-a, a));
    std::fill(bias.begin(), bias.end(), T(0));
}

template <class T>
Tensor<T> Linear<T>::forward(const Tensor<T>& x) {
    if (x.sample_size() != in_features)
        throw DataError("Linear: expected " + std::to_string(in_features) + " features, got " + x.shape_string());
    input_ = x;
    Tensor<T> y(x.n, out_features, 1, 1);
    matmul(y.data.data(), x.n, out_features, in_features, x.data.data(), false, weight.data(), true, false);
    for (std::size_t i = 0; i < x.n; ++i)
        for (std::size_t o = 0; o < out_features; ++o) y.data[i * out_features + o] += bias[o];
    return y;
}

template <class T>
Tensor<T> Linear<T>::backward(const Tensor<T>& dy) {
    if (dy.n != input_.n || dy.sample_size() != out_features) throw DataError("Linear: gradient shape mismatch");
    const T* g = dy.data.data();
    matmul(grad_weight.data(), out_features, in_features, dy.n, g, true, input_.data.data(), false, true);
    for (std::size_t i = 0; i < dy.n; ++i)
        for (std::size_t o = 0; o < out_features; ++o) grad_bias[o] += g[i * out_features + o];
    Tensor<T> dx(input_.n, input_.c, input_.h, input_.w);
    matmul(dx.data.data(), input_.n, in_features, out_features, g, false, weight.data(), false, false);
    return dx;
}

template <class T>
void Linear<T>::collect(const std::string& prefix, std::vector<ParamRef<T>>& out) {
    out.push_back({prefix + ".weight", &weight, &grad_weight});
    out.push_back({prefix + ".bias", &bias, &grad_bias});
}

// --- residual block -------------------------------------------------------------

template <class T>
ResidualBlock<T>::ResidualBlock(std::size_t cin, std::size_t cout, std::size_t stride)
    : conv1(cin, cout, 3, stride, 1, false),
      conv2(cout, cout, 3, 1, 1, false),
      bn1(cout),
      bn2(cout),
      has_projection(stride != 1 || cin != cout) {
    if (has_projection) projection = Conv2d<T>(cin, cout, 1, stride, 0, false);
}

template <class T>
std::size_t ResidualBlock<T>::parameter_count() const noexcept {
    return conv1.parameter_count() + conv2.parameter_count() + bn1.parameter_count() + bn2.parameter_count() +
           (has_projection ? projection.parameter_count() : 0);
}

template <class T>
void ResidualBlock<T>::init(Rng& rng) {
    conv1.init(rng);
    conv2.init(rng);
    if (has_projection) projection.init(rng);
}

template <class T>
Tensor<T> ResidualBlock<T>::forward(const Tensor<T>& x, bool training) {
    Tensor<T> a = relu1.forward(bn1.forward(conv1.forward(x), training));
    Tensor<T> b = bn2.forward(conv2.forward(a), training);
    const Tensor<T> skip = has_projection ? projection.forward(x) : x;
    if (!skip.same_shape(b)) throw DataError("ResidualBlock: skip " + skip.shape_string() + " vs " + b.shape_string());
    for (std::size_t i = 0; i < b.size(); ++i) b.data[i] += skip.data[i];
    return relu_out.forward(b);
}

template <class T>
Tensor<T> ResidualBlock<T>::backward(const Tensor<T>& dy) {
    const Tensor<T> dz = relu_out.backward(dy);
    Tensor<T> dx = conv1.backward(bn1.backward(relu1.backward(conv2.backward(bn2.backward(dz)))));
    const Tensor<T> dskip = has_projection ? projection.backward(dz) : dz;
    for (std::size_t i = 0; i < dx.size(); ++i) dx.data[i] += dskip.data[i];
    return dx;
}

template <class T>
void ResidualBlock<T>::collect(const std::string& prefix, std::vector<ParamRef<T>>& out) {
    conv1.collect(prefix + ".conv1", out);
    bn1.collect(prefix + ".bn1", out);
    conv2.collect(prefix + ".conv2", out);
    bn2.collect(prefix + ".bn2", out);
    if (has_projection) projection.collect(prefix + ".proj", out);
}

template <class T>
void ResidualBlock<T>::collect_buffers(const std::string& prefix, std::vector<BufferRef<T>>& out) {
    bn1.collect_buffers(prefix + ".bn1", out);
    bn2.collect_buffers(prefix + ".bn2", out);
}

template <class T>
double softmax_cross_entropy(const Tensor<T>& logits, std::span<const int> labels, Tensor<T>* grad) {
    const std::size_t n = logits.n, k = logits.sample_size();
    if (labels.size() != n) throw DataError("softmax_cross_entropy: label count does not match batch");
    if (grad) *grad = Tensor<T>(logits.n, logits.c, logits.h, logits.w);
    double loss = 0.0;
    std::vector<double> p(k);
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= k)
            throw DataError("softmax_cross_entropy: label " + std::to_string(labels[i]) + " out of range 0.." +
                            std::to_string(k - 1));
        const T* z = logits.sample(i);
        const double m = *std::max_element(z, z + k);
        double s = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            p[j] = std::exp(z[j] - m);
            s += p[j];
        }
        loss += m + std::log(s) - z[labels[i]];
        if (grad) {
            T* g = grad->sample(i);
            for (std::size_t j = 0; j < k; ++j)
                g[j] = static_cast<T>((p[j] / s - (static_cast<std::size_t>(labels[i]) == j ? 1.0 : 0.0)) /
                                      static_cast<double>(n));
        }
    }
    return loss / static_cast<double>(n);
}

template class Conv2d<float>;
template class Conv2d<double>;
template class BatchNorm2d<float>;
template class BatchNorm2d<double>;
template class Relu<float>;
template class Relu<double>;
template class GlobalAvgPool<float>;
template class GlobalAvgPool<double>;
template class Linear<float>;
template class Linear<double>;
template class ResidualBlock<float>;
template class ResidualBlock<double>;
template double softmax_cross_entropy<float>(const Tensor<float>&, std::span<const int>, Tensor<float>*);
template double softmax_cross_entropy<double>(const Tensor<double>&, std::span<const int>, Tensor<double>*);

}  // namespace gnss::cnn
