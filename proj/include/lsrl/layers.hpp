#pragma once

#include <cmath>
#include <cstring>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "lsrl/rng.hpp"
#include "lsrl/tensor.hpp"

namespace lsrl::nn {

inline double relu(double x) { return x > 0.0 ? x : 0.0; }
inline double leaky_relu(double x, double slope) { return x > 0.0 ? x : slope * x; }

// Per-pixel softmax over the channel axis of [C, H, W] or [B, C, H, W],
// stabilized by max subtraction.
inline Tensor softmax_channels(const Tensor& logits) {
    Tensor probs = logits;
    std::size_t batch = 1, channels, plane;
    if (logits.ndim() == 3) {
        channels = logits.dim(0);
        plane = logits.dim(1) * logits.dim(2);
    } else if (logits.ndim() == 4) {
        batch = logits.dim(0);
        channels = logits.dim(1);
        plane = logits.dim(2) * logits.dim(3);
    } else {
        throw std::invalid_argument("softmax_channels: expected [C,H,W] or [B,C,H,W]");
    }
    for (std::size_t b = 0; b < batch; ++b) {
        double* base = probs.data.data() + b * channels * plane;
        for (std::size_t p = 0; p < plane; ++p) {
            double mx = base[p];
            for (std::size_t c = 1; c < channels; ++c)
                mx = std::max(mx, base[c * plane + p]);
            double sum = 0.0;
            for (std::size_t c = 0; c < channels; ++c) {
                double e = std::exp(base[c * plane + p] - mx);
                base[c * plane + p] = e;
                sum += e;
            }
            for (std::size_t c = 0; c < channels; ++c) base[c * plane + p] /= sum;
        }
    }
    return probs;
}

struct ParamRef {
    Tensor* value;
    Tensor* grad;
};

class Layer {
public:
    virtual ~Layer() = default;
    // forward caches whatever backward needs; backward accumulates parameter
    // gradients and returns dL/dx.
    virtual Tensor forward(const Tensor& x) = 0;
    virtual Tensor backward(const Tensor& grad_out) = 0;
    virtual void collect_params(std::vector<ParamRef>&) {}
    virtual std::unique_ptr<Layer> clone() const = 0;
};

// Glorot uniform in +-sqrt(6 / (fan_in + fan_out)).
inline void glorot_init(Tensor& w, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& v : w.data) v = rng.uniform(-bound, bound);
}

// y = x W^T + b with x: [B, in], W: [out, in].
class Dense : public Layer {
public:
    Dense(std::size_t in, std::size_t out, Rng* rng = nullptr)
        : in_(in), out_(out), w_({out, in}), b_({out}), dw_({out, in}), db_({out}) {
        if (rng) glorot_init(w_, in, out, *rng);
    }

    Tensor forward(const Tensor& x) override {
        if (x.ndim() != 2 || x.dim(1) != in_)
            throw std::invalid_argument("Dense::forward: shape mismatch");
        x_ = x;
        const std::size_t batch = x.dim(0);
        Tensor y({batch, out_});
        gemm(false, true, batch, out_, in_, 1.0, x.data.data(), in_, w_.data.data(), in_,
             0.0, y.data.data(), out_);
        for (std::size_t b = 0; b < batch; ++b)
            for (std::size_t o = 0; o < out_; ++o) y[b * out_ + o] += b_[o];
        return y;
    }

    Tensor backward(const Tensor& dy) override {
        const std::size_t batch = x_.dim(0);
        if (dy.ndim() != 2 || dy.dim(0) != batch || dy.dim(1) != out_)
            throw std::invalid_argument("Dense::backward: shape mismatch");
        gemm(true, false, out_, in_, batch, 1.0, dy.data.data(), out_, x_.data.data(),
             in_, 1.0, dw_.data.data(), in_);
        for (std::size_t b = 0; b < batch; ++b)
            for (std::size_t o = 0; o < out_; ++o) db_[o] += dy[b * out_ + o];
        Tensor dx({batch, in_});
        gemm(false, false, batch, in_, out_, 1.0, dy.data.data(), out_, w_.data.data(),
             in_, 0.0, dx.data.data(), in_);
        return dx;
    }

    void collect_params(std::vector<ParamRef>& out) override {
        out.push_back({&w_, &dw_});
        out.push_back({&b_, &db_});
    }

    std::unique_ptr<Layer> clone() const override { return std::make_unique<Dense>(*this); }

    std::size_t in_features() const { return in_; }
    std::size_t out_features() const { return out_; }

private:
    std::size_t in_, out_;
    Tensor w_, b_, dw_, db_;
    Tensor x_;
};

namespace detail {

// cols[(c*k*k + ki*k + kj), (oi*ow + oj)] = img[c, oi*s - p + ki, oj*s - p + kj]
inline void im2col(const double* img, std::size_t channels, std::size_t h, std::size_t w,
                   std::size_t k, std::size_t stride, std::size_t pad, std::size_t oh,
                   std::size_t ow, double* cols) {
    const std::size_t n = oh * ow;
    for (std::size_t c = 0; c < channels; ++c) {
        for (std::size_t ki = 0; ki < k; ++ki) {
            for (std::size_t kj = 0; kj < k; ++kj) {
                double* row = cols + ((c * k + ki) * k + kj) * n;
                for (std::size_t oi = 0; oi < oh; ++oi) {
                    const long ii = static_cast<long>(oi * stride + ki) - static_cast<long>(pad);
                    if (ii < 0 || ii >= static_cast<long>(h)) {
                        std::memset(row + oi * ow, 0, ow * sizeof(double));
                        continue;
                    }
                    const double* src = img + (c * h + ii) * w;
                    for (std::size_t oj = 0; oj < ow; ++oj) {
                        const long jj = static_cast<long>(oj * stride + kj) - static_cast<long>(pad);
                        row[oi * ow + oj] =
                            (jj < 0 || jj >= static_cast<long>(w)) ? 0.0 : src[jj];
                    }
                }
            }
        }
    }
}

// Scatter-add inverse of im2col.
inline void col2im_add(const double* cols, std::size_t channels, std::size_t h,
                       std::size_t w, std::size_t k, std::size_t stride, std::size_t pad,
                       std::size_t oh, std::size_t ow, double* img) {
    const std::size_t n = oh * ow;
    for (std::size_t c = 0; c < channels; ++c) {
        for (std::size_t ki = 0; ki < k; ++ki) {
            for (std::size_t kj = 0; kj < k; ++kj) {
                const double* row = cols + ((c * k + ki) * k + kj) * n;
                for (std::size_t oi = 0; oi < oh; ++oi) {
                    const long ii = static_cast<long>(oi * stride + ki) - static_cast<long>(pad);
                    if (ii < 0 || ii >= static_cast<long>(h)) continue;
                    double* dst = img + (c * h + ii) * w;
                    for (std::size_t oj = 0; oj < ow; ++oj) {
                        const long jj = static_cast<long>(oj * stride + kj) - static_cast<long>(pad);
                        if (jj >= 0 && jj < static_cast<long>(w)) dst[jj] += row[oi * ow + oj];
                    }
                }
            }
        }
    }
}

inline std::size_t conv_out_size(std::size_t in, std::size_t k, std::size_t stride,
                                 std::size_t pad, const char* what) {
    const long num = static_cast<long>(in) + 2 * static_cast<long>(pad) - static_cast<long>(k);
    if (num < 0 || num % static_cast<long>(stride) != 0)
        throw std::invalid_argument(std::string(what) + ": non-integer output size");
    return static_cast<std::size_t>(num / static_cast<long>(stride)) + 1;
}

}  // namespace detail

// Cross-correlation convolution on [B, C, H, W].
class Conv2d : public Layer {
public:
    Conv2d(std::size_t in_c, std::size_t out_c, std::size_t k, std::size_t stride,
           std::size_t pad, Rng* rng = nullptr)
        : in_c_(in_c), out_c_(out_c), k_(k), stride_(stride), pad_(pad),
          w_({out_c, in_c * k * k}), b_({out_c}), dw_({out_c, in_c * k * k}), db_({out_c}) {
        if (rng) glorot_init(w_, in_c * k * k, out_c * k * k, *rng);
    }

    Tensor forward(const Tensor& x) override {
        if (x.ndim() != 4 || x.dim(1) != in_c_)
            throw std::invalid_argument("Conv2d::forward: shape mismatch");
        x_ = x;
        const std::size_t batch = x.dim(0), h = x.dim(2), w = x.dim(3);
        const std::size_t oh = detail::conv_out_size(h, k_, stride_, pad_, "Conv2d");
        const std::size_t ow = detail::conv_out_size(w, k_, stride_, pad_, "Conv2d");
        const std::size_t kk = in_c_ * k_ * k_, n = oh * ow;
        Tensor y({batch, out_c_, oh, ow});
        cols_.assign(kk * n, 0.0);
        for (std::size_t b = 0; b < batch; ++b) {
            detail::im2col(x.data.data() + b * in_c_ * h * w, in_c_, h, w, k_, stride_,
                           pad_, oh, ow, cols_.data());
            double* yb = y.data.data() + b * out_c_ * n;
            gemm(false, false, out_c_, n, kk, 1.0, w_.data.data(), kk, cols_.data(), n,
                 0.0, yb, n);
            for (std::size_t oc = 0; oc < out_c_; ++oc)
                for (std::size_t p = 0; p < n; ++p) yb[oc * n + p] += b_[oc];
        }
        return y;
    }

    Tensor backward(const Tensor& dy) override {
        const std::size_t batch = x_.dim(0), h = x_.dim(2), w = x_.dim(3);
        const std::size_t oh = dy.dim(2), ow = dy.dim(3);
        const std::size_t kk = in_c_ * k_ * k_, n = oh * ow;
        if (dy.ndim() != 4 || dy.dim(0) != batch || dy.dim(1) != out_c_)
            throw std::invalid_argument("Conv2d::backward: shape mismatch");
        Tensor dx({batch, in_c_, h, w});
        std::vector<double> dcols(kk * n);
        for (std::size_t b = 0; b < batch; ++b) {
            const double* dyb = dy.data.data() + b * out_c_ * n;
            detail::im2col(x_.data.data() + b * in_c_ * h * w, in_c_, h, w, k_, stride_,
                           pad_, oh, ow, cols_.data());
            gemm(false, true, out_c_, kk, n, 1.0, dyb, n, cols_.data(), n, 1.0,
                 dw_.data.data(), kk);
            for (std::size_t oc = 0; oc < out_c_; ++oc)
                for (std::size_t p = 0; p < n; ++p) db_[oc] += dyb[oc * n + p];
            gemm(true, false, kk, n, out_c_, 1.0, w_.data.data(), kk, dyb, n, 0.0,
                 dcols.data(), n);
            detail::col2im_add(dcols.data(), in_c_, h, w, k_, stride_, pad_, oh, ow,
                               dx.data.data() + b * in_c_ * h * w);
        }
        return dx;
    }

    void collect_params(std::vector<ParamRef>& out) override {
        out.push_back({&w_, &dw_});
        out.push_back({&b_, &db_});
    }

    std::unique_ptr<Layer> clone() const override { return std::make_unique<Conv2d>(*this); }

private:
    std::size_t in_c_, out_c_, k_, stride_, pad_;
    Tensor w_, b_, dw_, db_;
    Tensor x_;
    std::vector<double> cols_;
};

// Transposed convolution: the gradient-of-conv operator, so spatial dims map
// H -> (H－1)*stride - 2*pad + k. Weights stored [in_c, out_c*k*k].
class TConv2d : public Layer {
public:
    TConv2d(std::size_t in_c, std::size_t out_c, std::size_t k, std::size_t stride,
            std::size_t pad, Rng* rng = nullptr)
        : in_c_(in_c), out_c_(out_c), k_(k), stride_(stride), pad_(pad),
          w_({in_c, out_c * k * k}), b_({out_c}), dw_({in_c, out_c * k * k}), db_({out_c}) {
        if (rng) glorot_init(w_, in_c * k * k, out_c * k * k, *rng);
    }

    static std::size_t out_size(std::size_t in, std::size_t k, std::size_t stride,
                                std::size_t pad) {
        const long v = static_cast<long>((in - 1) * stride + k) - 2 * static_cast<long>(pad);
        if (in == 0 || v <= 0)
            throw std::invalid_argument("TConv2d: non-positive output size");
        return static_cast<std::size_t>(v);
    }

    Tensor forward(const Tensor& x) override {
        if (x.ndim() != 4 || x.dim(1) != in_c_)
            throw std::invalid_argument("TConv2d::forward: shape mismatch");
        x_ = x;
        const std::size_t batch = x.dim(0), h = x.dim(2), w = x.dim(3);
        const std::size_t oh = out_size(h, k_, stride_, pad_);
        const std::size_t ow = out_size(w, k_, stride_, pad_);
        const std::size_t kk = out_c_ * k_ * k_, n = h * w;
        Tensor y({batch, out_c_, oh, ow});
        std::vector<double> cols(kk * n);
        for (std::size_t b = 0; b < batch; ++b) {
            const double* xb = x.data.data() + b * in_c_ * n;
            gemm(true, false, kk, n, in_c_, 1.0, w_.data.data(), kk, xb, n, 0.0,
                 cols.data(), n);
            double* yb = y.data.data() + b * out_c_ * oh * ow;
            detail::col2im_add(cols.data(), out_c_, oh, ow, k_, stride_, pad_, h, w, yb);
            for (std::size_t oc = 0; oc < out_c_; ++oc)
                for (std::size_t p = 0; p < oh * ow; ++p) yb[oc * oh * ow + p] += b_[oc];
        }
        return y;
    }

    Tensor backward(const Tensor& dy) override {
        const std::size_t batch = x_.dim(0), h = x_.dim(2), w = x_.dim(3);
        const std::size_t oh = dy.dim(2), ow = dy.dim(3);
        const std::size_t kk = out_c_ * k_ * k_, n = h * w;
        if (dy.ndim() != 4 || dy.dim(0) != batch || dy.dim(1) != out_c_)
            throw std::invalid_argument("TConv2d::backward: shape mismatch");
        Tensor dx({batch, in_c_, h, w});
        std::vector<double> dcols(kk * n);
        for (std::size_t b = 0; b < batch; ++b) {
            const double* dyb = dy.data.data() + b * out_c_ * oh * ow;
            detail::im2col(dyb, out_c_, oh, ow, k_, stride_, pad_, h, w, dcols.data());
            gemm(false, false, in_c_, n, kk, 1.0, w_.data.data(), kk, dcols.data(), n,
                 0.0, dx.data.data() + b * in_c_ * n, n);
            const double* xb = x_.data.data() + b * in_c_ * n;
            gemm(false, true, in_c_, kk, n, 1.0, xb, n, dcols.data(), n, 1.0,
                 dw_.data.data(), kk);
            for (std::size_t oc = 0; oc < out_c_; ++oc)
                for (std::size_t p = 0; p < oh * ow; ++p) db_[oc] += dyb[oc * oh * ow + p];
        }
        return dx;
    }

    void collect_params(std::vector<ParamRef>& out) override {
        out.push_back({&w_, &dw_});
        out.push_back({&b_, &db_});
    }

    std::unique_ptr<Layer> clone() const override { return std::make_unique<TConv2d>(*this); }

private:
    std::size_t in_c_, out_c_, k_, stride_, pad_;
    Tensor w_, b_, dw_, db_;
    Tensor x_;
};

class LeakyRelu : public Layer {
public:
    explicit LeakyRelu(double slope = 0.2) : slope_(slope) {}

    Tensor forward(const Tensor& x) override {
        x_ = x;
        Tensor y = x;
        for (double& v : y.data) v = leaky_relu(v, slope_);
        return y;
    }

    Tensor backward(const Tensor& dy) override {
        if (dy.numel() != x_.numel())
            throw std::invalid_argument("LeakyRelu::backward: shape mismatch");
        Tensor dx = dy;
        for (std::size_t i = 0; i < dx.numel(); ++i)
            if (x_[i] <= 0.0) dx[i] *= slope_;
        return dx;
    }

    std::unique_ptr<Layer> clone() const override { return std::make_unique<LeakyRelu>(*this); }

private:
    double slope_;
    Tensor x_;
};

class Relu : public Layer {
public:
    Tensor forward(const Tensor& x) override {
        x_ = x;
        Tensor y = x;
        for (double& v : y.data) v = relu(v);
        return y;
    }

    Tensor backward(const Tensor& dy) override {
        if (dy.numel() != x_.numel())
            throw std::invalid_argument("Relu::backward: shape mismatch");
        Tensor dx = dy;
        for (std::size_t i = 0; i < dx.numel(); ++i)
            if (x_[i] <= 0.0) dx[i] = 0.0;
        return dx;
    }

    std::unique_ptr<Layer> clone() const override { return std::make_unique<Relu>(*this); }

private:
    Tensor x_;
};

// Ordered layer stack.
class Sequential {
public:
    Sequential() = default;
    Sequential(const Sequential& other) { *this = other; }
    Sequential& operator=(const Sequential& other) {
        layers_.clear();
        for (const auto& l : other.layers_) layers_.push_back(l->clone());
        return *this;
    }
    Sequential(Sequential&&) = default;
    Sequential& operator=(Sequential&&) = default;

    template <typename L, typename... Args>
    L& emplace(Args&&... args) {
        layers_.push_back(std::make_unique<L>(std::forward<Args>(args)...));
        return static_cast<L&>(*layers_.back());
    }

    Tensor forward(const Tensor& x) {
        Tensor h = x;
        for (auto& l : layers_) h = l->forward(h);
        return h;
    }

    Tensor backward(const Tensor& dy) {
        Tensor g = dy;
        for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
        return g;
    }

    std::vector<ParamRef> params() {
        std::vector<ParamRef> out;
        for (auto& l : layers_) l->collect_params(out);
        return out;
    }

    void zero_grad() {
        for (ParamRef p : params()) p.grad->fill(0.0);
    }

    std::size_t size() const { return layers_.size(); }

    // Bitwise parameter copy; layer structure must agree.
    void copy_params_from(Sequential& other) {
        auto dst = params();
        auto src = other.params();
        if (dst.size() != src.size())
            throw std::invalid_argument("copy_params_from: layer structure mismatch");
        for (std::size_t i = 0; i < dst.size(); ++i) {
            if (dst[i].value->shape != src[i].value->shape)
                throw std::invalid_argument("copy_params_from: parameter shape mismatch");
            dst[i].value->data = src[i].value->data;
        }
    }

private:
    std::vector<std::unique_ptr<Layer>> layers_;
};

}  // namespace lsrl::nn
