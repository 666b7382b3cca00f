#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "mvap/nn/spec.hpp"
#include "mvap/nn/tensor.hpp"
#include "mvap/rng.hpp"

namespace mvap::nn {

enum class Mode { train, eval };

template <typename T>
struct ParamView {
  std::string name;
  T* value = nullptr;
  T* grad = nullptr;  // null for non-trainable state (batchnorm running stats)
  std::size_t size = 0;
  bool trainable = true;
};

// One network stage. Eval-mode forward is const and touches no mutable
// state, so a trained network can serve inference from multiple threads;
// train-mode forward stashes whatever backward() needs and is meant to be
// driven by a single trainer.
template <typename T>
class Layer {
 public:
  virtual ~Layer() = default;
  virtual std::string name() const = 0;
  virtual Shape out_shape(const Shape& in) const = 0;
  virtual void forward_eval(const Tensor<T>& in, Tensor<T>& out) const = 0;
  virtual void forward_train(const Tensor<T>& in, Tensor<T>& out, Rng& rng) {
    (void)rng;
    forward_eval(in, out);
  }
  // din is pre-sized and zeroed by the caller; parameter gradients accumulate.
  virtual void backward(const Tensor<T>& in, const Tensor<T>& dout,
                        Tensor<T>& din) = 0;
  virtual std::vector<ParamView<T>> params() { return {}; }
  virtual void init(Rng& rng) { (void)rng; }
};

namespace detail {

inline int conv_extent(int in, int kernel, int stride, int pad,
                       const std::string& who) {
  const int out = (in + 2 * pad - kernel) / stride + 1;
  if (in + 2 * pad < kernel || out <= 0)
    throw std::invalid_argument(who + ": kernel " + std::to_string(kernel) +
                                " does not fit input extent " +
                                std::to_string(in));
  return out;
}

// He-style uniform init, scale from fan-in.
template <typename T>
void fan_in_uniform(T* w, std::size_t n, int fan_in, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
  for (std::size_t i = 0; i < n; ++i)
    w[i] = static_cast<T>(rng.uniform(-bound, bound));
}

}  // namespace detail

// Cross-correlation convolution (the usual CNN convention), weights laid out
// [out_ch][in_ch][kh][kw].
template <typename T>
class Conv2d final : public Layer<T> {
 public:
  Conv2d(const LayerSpec& spec, const Shape& in)
      : out_ch_(spec.out_ch),
        in_ch_(in.c),
        k_(spec.kernel),
        stride_(spec.stride),
        pad_(spec.pad),
        in_h_(in.h),
        in_w_(in.w) {
    out_h_ = detail::conv_extent(in.h, k_, stride_, pad_, name());
    out_w_ = detail::conv_extent(in.w, k_, stride_, pad_, name());
    weight_.assign(static_cast<std::size_t>(out_ch_) * in_ch_ * k_ * k_, T{0});
    bias_.assign(static_cast<std::size_t>(out_ch_), T{0});
    grad_weight_.assign(weight_.size(), T{0});
    grad_bias_.assign(bias_.size(), T{0});
  }

  std::string name() const override {
    return "conv(" + std::to_string(out_ch_) + "," + std::to_string(k_) + "," +
           std::to_string(stride_) + "," + std::to_string(pad_) + ")";
  }

  Shape out_shape(const Shape& in) const override {
    return {in.n, out_ch_, out_h_, out_w_};
  }

  void init(Rng& rng) override {
    detail::fan_in_uniform(weight_.data(), weight_.size(), in_ch_ * k_ * k_, rng);
    std::fill(bias_.begin(), bias_.end(), T{0});
  }

  void forward_eval(const Tensor<T>& in, Tensor<T>& out) const override {
    for (int n = 0; n < in.shape.n; ++n)
      for (int oc = 0; oc < out_ch_; ++oc) {
        T* outp = out.plane(n, oc);
        std::fill(outp, outp + static_cast<std::size_t>(out_h_) * out_w_,
                  bias_[static_cast<std::size_t>(oc)]);
        for (int ic = 0; ic < in_ch_; ++ic) {
          const T* inp = in.plane(n, ic);
          const T* wk = kernel_ptr(oc, ic);
          for (int kh = 0; kh < k_; ++kh)
            for (int kw = 0; kw < k_; ++kw) {
              const T wv = wk[kh * k_ + kw];
              int oh_lo, oh_hi, ow_lo, ow_hi;
              bounds(kh, in_h_, out_h_, oh_lo, oh_hi);
              bounds(kw, in_w_, out_w_, ow_lo, ow_hi);
              for (int oh = oh_lo; oh <= oh_hi; ++oh) {
                const int ih = oh * stride_ - pad_ + kh;
                const T* in_row = inp + static_cast<std::size_t>(ih) * in_w_ +
                                  (ow_lo * stride_ - pad_ + kw);
                T* out_row = outp + static_cast<std::size_t>(oh) * out_w_ + ow_lo;
                const int len = ow_hi - ow_lo + 1;
                if (stride_ == 1) {
                  for (int i = 0; i < len; ++i) out_row[i] += wv * in_row[i];
                } else {
                  for (int i = 0; i < len; ++i)
                    out_row[i] += wv * in_row[static_cast<std::size_t>(i) * stride_];
                }
              }
            }
        }
      }
  }

  void backward(const Tensor<T>& in, const Tensor<T>& dout,
                Tensor<T>& din) override {
    for (int n = 0; n < in.shape.n; ++n)
      for (int oc = 0; oc < out_ch_; ++oc) {
        const T* dop = dout.plane(n, oc);
        T bias_acc{0};
        const std::size_t plane = static_cast<std::size_t>(out_h_) * out_w_;
        for (std::size_t i = 0; i < plane; ++i) bias_acc += dop[i];
        grad_bias_[static_cast<std::size_t>(oc)] += bias_acc;

        for (int ic = 0; ic < in_ch_; ++ic) {
          const T* inp = in.plane(n, ic);
          T* dinp = din.plane(n, ic);
          const T* wk = kernel_ptr(oc, ic);
          T* gwk = grad_weight_.data() +
                   (static_cast<std::size_t>(oc) * in_ch_ + ic) * k_ * k_;
          for (int kh = 0; kh < k_; ++kh)
            for (int kw = 0; kw < k_; ++kw) {
              const T wv = wk[kh * k_ + kw];
              T w_acc{0};
              int oh_lo, oh_hi, ow_lo, ow_hi;
              bounds(kh, in_h_, out_h_, oh_lo, oh_hi);
              bounds(kw, in_w_, out_w_, ow_lo, ow_hi);
              for (int oh = oh_lo; oh <= oh_hi; ++oh) {
                const int ih = oh * stride_ - pad_ + kh;
                const std::size_t in_off =
                    static_cast<std::size_t>(ih) * in_w_ +
                    (ow_lo * stride_ - pad_ + kw);
                const T* in_row = inp + in_off;
                T* din_row = dinp + in_off;
                const T* do_row = dop + static_cast<std::size_t>(oh) * out_w_ + ow_lo;
                const int len = ow_hi - ow_lo + 1;
                if (stride_ == 1) {
                  for (int i = 0; i < len; ++i) {
                    w_acc += do_row[i] * in_row[i];
                    din_row[i] += wv * do_row[i];
                  }
                } else {
                  for (int i = 0; i < len; ++i) {
                    const std::size_t j = static_cast<std::size_t>(i) * stride_;
                    w_acc += do_row[i] * in_row[j];
                    din_row[j] += wv * do_row[i];
                  }
                }
              }
              gwk[kh * k_ + kw] += w_acc;
            }
        }
      }
  }

  std::vector<ParamView<T>> params() override {
    return {
        {"weight", weight_.data(), grad_weight_.data(), weight_.size(), true},
        {"bias", bias_.data(), grad_bias_.data(), bias_.size(), true},
    };
  }

 private:
  const T* kernel_ptr(int oc, int ic) const {
    return weight_.data() + (static_cast<std::size_t>(oc) * in_ch_ + ic) * k_ * k_;
  }

  // Output range where the input index k-offset stays in bounds.
  void bounds(int k_off, int in_extent, int out_extent, int& lo, int& hi) const {
    const int a = pad_ - k_off;
    lo = a <= 0 ? 0 : (a + stride_ - 1) / stride_;
    const int b = in_extent - 1 - k_off + pad_;
    hi = std::min(out_extent - 1, b / stride_);
  }

  int out_ch_, in_ch_, k_, stride_, pad_, in_h_, in_w_, out_h_ = 0, out_w_ = 0;
  std::vector<T> weight_, bias_, grad_weight_, grad_bias_;
};

template <typename T>
class ReLU final : public Layer<T> {
 public:
  std::string name() const override { return "relu"; }
  Shape out_shape(const Shape& in) const override { return in; }

  void forward_eval(const Tensor<T>& in, Tensor<T>& out) const override {
    for (std::size_t i = 0; i < in.data.size(); ++i)
      out.data[i] = in.data[i] > T{0} ? in.data[i] : T{0};
  }

  void backward(const Tensor<T>& in, const Tensor<T>& dout,
                Tensor<T>& din) override {
    for (std::size_t i = 0; i < in.data.size(); ++i)
      din.data[i] = in.data[i] > T{0} ? dout.data[i] : T{0};
  }
};

template <typename T>
class MaxPool final : public Layer<T> {
 public:
  MaxPool(const LayerSpec& spec, const Shape& in)
      : k_(spec.kernel), stride_(spec.stride), in_h_(in.h), in_w_(in.w) {
    out_h_ = detail::conv_extent(in.h, k_, stride_, 0, name());
    out_w_ = detail::conv_extent(in.w, k_, stride_, 0, name());
  }

  std::string name() const override {
    return "maxpool(" + std::to_string(k_) + "," + std::to_string(stride_) + ")";
  }

  Shape out_shape(const Shape& in) const override {
    return {in.n, in.c, out_h_, out_w_};
  }

  void forward_eval(const Tensor<T>& in, Tensor<T>& out) const override {
    pool(in, out, nullptr);
  }

  void forward_train(const Tensor<T>& in, Tensor<T>& out, Rng&) override {
    argmax_.resize(out.shape.numel());
    pool(in, out, argmax_.data());
  }

  void backward(const Tensor<T>& in, const Tensor<T>& dout,
                Tensor<T>& din) override {
    const std::size_t in_plane = static_cast<std::size_t>(in_h_) * in_w_;
    const std::size_t out_plane = static_cast<std::size_t>(out_h_) * out_w_;
    std::size_t o = 0;
    for (int n = 0; n < in.shape.n; ++n)
      for (int c = 0; c < in.shape.c; ++c) {
        T* dinp = din.data.data() +
                  (static_cast<std::size_t>(n) * in.shape.c + c) * in_plane;
        const T* dop = dout.data.data() +
                       (static_cast<std::size_t>(n) * in.shape.c + c) * out_plane;
        for (std::size_t i = 0; i < out_plane; ++i, ++o)
          dinp[argmax_[o]] += dop[i];
      }
  }

 private:
  // Window max; ties keep the first element in scan order. argmax holds the
  // in-plane linear index when requested (training only).
  void pool(const Tensor<T>& in, Tensor<T>& out, std::int32_t* argmax) const {
    std::size_t o = 0;
    for (int n = 0; n < in.shape.n; ++n)
      for (int c = 0; c < in.shape.c; ++c) {
        const T* inp = in.plane(n, c);
        for (int oh = 0; oh < out_h_; ++oh)
          for (int ow = 0; ow < out_w_; ++ow, ++o) {
            const int h0 = oh * stride_, w0 = ow * stride_;
            T best = inp[static_cast<std::size_t>(h0) * in_w_ + w0];
            std::int32_t best_idx = h0 * in_w_ + w0;
            for (int dh = 0; dh < k_; ++dh)
              for (int dw = 0; dw < k_; ++dw) {
                const std::int32_t idx = (h0 + dh) * in_w_ + (w0 + dw);
                const T v = inp[static_cast<std::size_t>(idx)];
                if (v > best) {
                  best = v;
                  best_idx = idx;
                }
              }
            out.data[o] = best;
            if (argmax) argmax[o] = best_idx;
          }
      }
  }

  int k_, stride_, in_h_, in_w_, out_h_ = 0, out_w_ = 0;
  std::vector<std::int32_t> argmax_;
};

// Per-channel batch normalization: batch statistics in train mode, running
// statistics in eval mode. Running variance stores the biased estimate.
template <typename T>
class BatchNorm final : public Layer<T> {
 public:
  BatchNorm(const LayerSpec& spec, const Shape& in)
      : channels_(in.c), momentum_(spec.momentum), eps_(spec.epsilon) {
    gamma_.assign(static_cast<std::size_t>(channels_), T{1});
    beta_.assign(static_cast<std::size_t>(channels_), T{0});
    grad_gamma_.assign(gamma_.size(), T{0});
    grad_beta_.assign(beta_.size(), T{0});
    running_mean_.assign(gamma_.size(), T{0});
    running_var_.assign(gamma_.size(), T{1});
  }

  std::string name() const override { return "batchnorm"; }
  Shape out_shape(const Shape& in) const override { return in; }

  void forward_eval(const Tensor<T>& in, Tensor<T>& out) const override {
    const std::size_t plane = static_cast<std::size_t>(in.shape.h) * in.shape.w;
    for (int n = 0; n < in.shape.n; ++n)
      for (int c = 0; c < channels_; ++c) {
        const std::size_t ci = static_cast<std::size_t>(c);
        const T scale =
            gamma_[ci] / static_cast<T>(std::sqrt(
                             static_cast<double>(running_var_[ci]) + eps_));
        const T shift = beta_[ci] - scale * running_mean_[ci];
        const T* inp = in.plane(n, c);
        T* outp = out.plane(n, c);
        for (std::size_t i = 0; i < plane; ++i) outp[i] = scale * inp[i] + shift;
      }
  }

  void forward_train(const Tensor<T>& in, Tensor<T>& out, Rng&) override {
    const std::size_t plane = static_cast<std::size_t>(in.shape.h) * in.shape.w;
    const std::size_t m = plane * static_cast<std::size_t>(in.shape.n);
    xhat_.resize(in.data.size());
    inv_std_.assign(static_cast<std::size_t>(channels_), T{0});

    for (int c = 0; c < channels_; ++c) {
      const std::size_t ci = static_cast<std::size_t>(c);
      T sum{0};
      for (int n = 0; n < in.shape.n; ++n) {
        const T* inp = in.plane(n, c);
        for (std::size_t i = 0; i < plane; ++i) sum += inp[i];
      }
      const T mean = sum / static_cast<T>(m);
      T var_sum{0};
      for (int n = 0; n < in.shape.n; ++n) {
        const T* inp = in.plane(n, c);
        for (std::size_t i = 0; i < plane; ++i) {
          const T d = inp[i] - mean;
          var_sum += d * d;
        }
      }
      const T var = var_sum / static_cast<T>(m);
      const T inv_std =
          static_cast<T>(1.0 / std::sqrt(static_cast<double>(var) + eps_));
      inv_std_[ci] = inv_std;

      for (int n = 0; n < in.shape.n; ++n) {
        const T* inp = in.plane(n, c);
        T* outp = out.plane(n, c);
        T* xh = xhat_.data() +
                (static_cast<std::size_t>(n) * channels_ + ci) * plane;
        for (std::size_t i = 0; i < plane; ++i) {
          xh[i] = (inp[i] - mean) * inv_std;
          outp[i] = gamma_[ci] * xh[i] + beta_[ci];
        }
      }

      running_mean_[ci] =
          static_cast<T>((1.0 - momentum_) * running_mean_[ci] + momentum_ * mean);
      running_var_[ci] =
          static_cast<T>((1.0 - momentum_) * running_var_[ci] + momentum_ * var);
    }
  }

  void backward(const Tensor<T>& in, const Tensor<T>& dout,
                Tensor<T>& din) override {
    const std::size_t plane = static_cast<std::size_t>(in.shape.h) * in.shape.w;
    const std::size_t m = plane * static_cast<std::size_t>(in.shape.n);
    for (int c = 0; c < channels_; ++c) {
      const std::size_t ci = static_cast<std::size_t>(c);
      T sum_dy{0}, sum_dy_xhat{0};
      for (int n = 0; n < in.shape.n; ++n) {
        const T* dop = dout.plane(n, c);
        const T* xh = xhat_.data() +
                      (static_cast<std::size_t>(n) * channels_ + ci) * plane;
        for (std::size_t i = 0; i < plane; ++i) {
          sum_dy += dop[i];
          sum_dy_xhat += dop[i] * xh[i];
        }
      }
      grad_beta_[ci] += sum_dy;
      grad_gamma_[ci] += sum_dy_xhat;

      const T k = gamma_[ci] * inv_std_[ci] / static_cast<T>(m);
      for (int n = 0; n < in.shape.n; ++n) {
        const T* dop = dout.plane(n, c);
        const T* xh = xhat_.data() +
                      (static_cast<std::size_t>(n) * channels_ + ci) * plane;
        T* dinp = din.plane(n, c);
        for (std::size_t i = 0; i < plane; ++i)
          dinp[i] = k * (static_cast<T>(m) * dop[i] - sum_dy - xh[i] * sum_dy_xhat);
      }
    }
  }

  std::vector<ParamView<T>> params() override {
    return {
        {"gamma", gamma_.data(), grad_gamma_.data(), gamma_.size(), true},
        {"beta", beta_.data(), grad_beta_.data(), beta_.size(), true},
        {"running_mean", running_mean_.data(), nullptr, running_mean_.size(), false},
        {"running_var", running_var_.data(), nullptr, running_var_.size(), false},
    };
  }

 private:
  int channels_;
  double momentum_, eps_;
  std::vector<T> gamma_, beta_, grad_gamma_, grad_beta_;
  std::vector<T> running_mean_, running_var_;
  std::vector<T> xhat_, inv_std_;  // train-mode stash
};

// Inverted dropout: identity in eval mode.
template <typename T>
class Dropout final : public Layer<T> {
 public:
  explicit Dropout(const LayerSpec& spec) : rate_(spec.rate) {}

  std::string name() const override { return "dropout"; }
  Shape out_shape(const Shape& in) const override { return in; }

  void forward_eval(const Tensor<T>& in, Tensor<T>& out) const override {
    out.data = in.data;
  }

  void forward_train(const Tensor<T>& in, Tensor<T>& out, Rng& rng) override {
    mask_.resize(in.data.size());
    const T keep_scale = static_cast<T>(1.0 / (1.0 - rate_));
    for (std::size_t i = 0; i < in.data.size(); ++i) {
      mask_[i] = rng.uniform() >= rate_ ? keep_scale : T{0};
      out.data[i] = in.data[i] * mask_[i];
    }
  }

  void backward(const Tensor<T>&, const Tensor<T>& dout,
                Tensor<T>& din) override {
    for (std::size_t i = 0; i < dout.data.size(); ++i)
      din.data[i] = dout.data[i] * mask_[i];
  }

 private:
  double rate_;
  std::vector<T> mask_;
};

template <typename T>
class Flatten final : public Layer<T> {
 public:
  std::string name() const override { return "flatten"; }
  Shape out_shape(const Shape& in) const override {
    return {in.n, in.c * in.h * in.w, 1, 1};
  }
  void forward_eval(const Tensor<T>& in, Tensor<T>& out) const override {
    out.data = in.data;
  }
  void backward(const Tensor<T>&, const Tensor<T>& dout,
                Tensor<T>& din) override {
    din.data = dout.data;
  }
};

// Fully connected, weights [out][in].
template <typename T>
class Dense final : public Layer<T> {
 public:
  Dense(const LayerSpec& spec, const Shape& in)
      : in_dim_(in.c * in.h * in.w), out_dim_(spec.out_dim) {
    if (in.h != 1 || in.w != 1)
      throw std::invalid_argument(
          "dense: expects flattened input, got shape " + in.str() +
          " (insert flatten)");
    weight_.assign(static_cast<std::size_t>(out_dim_) * in_dim_, T{0});
    bias_.assign(static_cast<std::size_t>(out_dim_), T{0});
    grad_weight_.assign(weight_.size(), T{0});
    grad_bias_.assign(bias_.size(), T{0});
  }

  std::string name() const override {
    return "dense(" + std::to_string(out_dim_) + ")";
  }
  Shape out_shape(const Shape& in) const override {
    return {in.n, out_dim_, 1, 1};
  }

  void init(Rng& rng) override {
    detail::fan_in_uniform(weight_.data(), weight_.size(), in_dim_, rng);
    std::fill(bias_.begin(), bias_.end(), T{0});
  }

  void forward_eval(const Tensor<T>& in, Tensor<T>& out) const override {
    for (int n = 0; n < in.shape.n; ++n) {
      const T* x = in.data.data() + static_cast<std::size_t>(n) * in_dim_;
      T* y = out.data.data() + static_cast<std::size_t>(n) * out_dim_;
      for (int o = 0; o < out_dim_; ++o) {
        const T* w = weight_.data() + static_cast<std::size_t>(o) * in_dim_;
        T acc = bias_[static_cast<std::size_t>(o)];
        for (int i = 0; i < in_dim_; ++i) acc += w[i] * x[i];
        y[o] = acc;
      }
    }
  }

  void backward(const Tensor<T>& in, const Tensor<T>& dout,
                Tensor<T>& din) override {
    for (int n = 0; n < in.shape.n; ++n) {
      const T* x = in.data.data() + static_cast<std::size_t>(n) * in_dim_;
      const T* dy = dout.data.data() + static_cast<std::size_t>(n) * out_dim_;
      T* dx = din.data.data() + static_cast<std::size_t>(n) * in_dim_;
      for (int o = 0; o < out_dim_; ++o) {
        const T d = dy[o];
        grad_bias_[static_cast<std::size_t>(o)] += d;
        T* gw = grad_weight_.data() + static_cast<std::size_t>(o) * in_dim_;
        const T* w = weight_.data() + static_cast<std::size_t>(o) * in_dim_;
        for (int i = 0; i < in_dim_; ++i) {
          gw[i] += d * x[i];
          dx[i] += d * w[i];
        }
      }
    }
  }

  std::vector<ParamView<T>> params() override {
    return {
        {"weight", weight_.data(), grad_weight_.data(), weight_.size(), true},
        {"bias", bias_.data(), grad_bias_.data(), bias_.size(), true},
    };
  }

 private:
  int in_dim_, out_dim_;
  std::vector<T> weight_, bias_, grad_weight_, grad_bias_;
};

template <typename T>
std::unique_ptr<Layer<T>> make_layer(const LayerSpec& spec, const Shape& in) {
  switch (spec.kind) {
    case LayerKind::conv:
      return std::make_unique<Conv2d<T>>(spec, in);
    case LayerKind::relu:
      return std::make_unique<ReLU<T>>();
    case LayerKind::maxpool:
      return std::make_unique<MaxPool<T>>(spec, in);
    case LayerKind::batchnorm:
      return std::make_unique<BatchNorm<T>>(spec, in);
    case LayerKind::dropout:
      return std::make_unique<Dropout<T>>(spec);
    case LayerKind::flatten:
      return std::make_unique<Flatten<T>>();
    case LayerKind::dense:
      return std::make_unique<Dense<T>>(spec, in);
    case LayerKind::softmax:
      return nullptr;  // handled by the network head
  }
  throw std::logic_error("unreachable layer kind");
}

}  // namespace mvap::nn
