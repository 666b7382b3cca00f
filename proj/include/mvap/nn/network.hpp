#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mvap/nn/layers.hpp"

namespace mvap::nn {

inline constexpr int kClassCount = 9;
inline constexpr double kLogClamp = 1e-12;  // floor inside cross-entropy

struct Prediction {
  int class_id = 0;      // argmax, lowest index on ties
  double confidence = 0; // max softmax probability
};

// Layered classifier ending in a softmax over the nine attitude classes.
template <typename T>
class Network {
 public:
  Network(const NetworkSpec& spec, Shape input) : spec_(spec), input_(input) {
    input_.n = 1;
    Shape cur = input_;
    for (const auto& ls : spec.layers) {
      auto layer = make_layer<T>(ls, cur);
      if (!layer) continue;  // explicit softmax marker
      cur = layer->out_shape(cur);
      layers_.push_back(std::move(layer));
      shapes_.push_back(cur);
    }
    if (cur.c * cur.h * cur.w != kClassCount)
      throw std::invalid_argument(
          "network spec must end with " + std::to_string(kClassCount) +
          " outputs, got " + std::to_string(cur.c * cur.h * cur.w) + " after " +
          (layers_.empty() ? std::string("input") : layers_.back()->name()));
  }

  const NetworkSpec& spec() const { return spec_; }
  Shape input_shape() const { return input_; }

  void init_params(Rng& rng) {
    for (auto& l : layers_) l->init(rng);
  }

  // Class probabilities, shape (batch, 9, 1, 1). Train mode stashes
  // activations for a following backward() and advances the dropout stream.
  Tensor<T> forward(const Tensor<T>& batch, Mode mode, Rng* rng = nullptr) {
    if (mode == Mode::train) {
      if (!rng) throw std::invalid_argument("train-mode forward needs an rng");
      forward_train_impl(batch, *rng);
      return acts_.back();
    }
    return forward_eval(batch);
  }

  Tensor<T> forward_eval(const Tensor<T>& batch) const {
    check_input(batch);
    Tensor<T> cur = batch;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      Shape s = shapes_[i];
      s.n = batch.shape.n;
      Tensor<T> next(s);
      layers_[i]->forward_eval(cur, next);
      cur = std::move(next);
    }
    softmax_rows(cur);
    return cur;
  }

  // Mean categorical cross-entropy over the batch plus analytic gradients
  // into every parameter view. Gradients are zeroed first.
  T loss_and_grads(const Tensor<T>& batch, std::span<const int> labels,
                   Rng& rng) {
    if (static_cast<std::size_t>(batch.shape.n) != labels.size())
      throw std::invalid_argument("loss_and_grads: batch/label count mismatch");
    for (int y : labels)
      if (y < 0 || y >= kClassCount)
        throw std::invalid_argument("loss_and_grads: label out of range 0..8: " +
                                    std::to_string(y));
    zero_grads();
    forward_train_impl(batch, rng);
    const Tensor<T>& probs = acts_.back();

    const int n = batch.shape.n;
    T loss{0};
    Tensor<T> delta(probs.shape);  // d(loss)/d(logits) via fused softmax+CE
    for (int i = 0; i < n; ++i) {
      const T* p = probs.data.data() + static_cast<std::size_t>(i) * kClassCount;
      T* d = delta.data.data() + static_cast<std::size_t>(i) * kClassCount;
      const int y = labels[static_cast<std::size_t>(i)];
      const double py = std::max(static_cast<double>(p[y]), kLogClamp);
      loss -= static_cast<T>(std::log(py));
      for (int k = 0; k < kClassCount; ++k)
        d[k] = (p[k] - (k == y ? T{1} : T{0})) / static_cast<T>(n);
    }
    loss /= static_cast<T>(n);

    // delta is already d(loss)/d(logits); acts_[i] is the input of layer i.
    Tensor<T> dout = std::move(delta);
    for (std::size_t i = layers_.size(); i-- > 0;) {
      Tensor<T> din(acts_[i].shape);
      layers_[i]->backward(acts_[i], dout, din);
      dout = std::move(din);
    }
    input_grad_ = std::move(dout);
    return loss;
  }

  const Tensor<T>& last_probabilities() const { return acts_.back(); }
  const Tensor<T>& last_input_gradient() const { return input_grad_; }

  // Eval-mode argmax per frame; deterministic, lowest index wins ties.
  std::vector<Prediction> predict(const Tensor<T>& batch) const {
    const Tensor<T> probs = forward_eval(batch);
    std::vector<Prediction> out(static_cast<std::size_t>(batch.shape.n));
    for (int i = 0; i < batch.shape.n; ++i) {
      const T* p = probs.data.data() + static_cast<std::size_t>(i) * kClassCount;
      int best = 0;
      for (int k = 1; k < kClassCount; ++k)
        if (p[k] > p[best]) best = k;
      out[static_cast<std::size_t>(i)] = {best, static_cast<double>(p[best])};
    }
    return out;
  }

  std::vector<ParamView<T>> param_views() {
    std::vector<ParamView<T>> views;
    for (std::size_t i = 0; i < layers_.size(); ++i)
      for (auto v : layers_[i]->params()) {
        v.name = "L" + std::to_string(i) + "." + v.name;
        views.push_back(v);
      }
    return views;
  }

  std::size_t param_count() {
    std::size_t n = 0;
    for (const auto& v : param_views()) n += v.size;
    return n;
  }

 private:
  void check_input(const Tensor<T>& batch) const {
    if (batch.shape.c != input_.c || batch.shape.h != input_.h ||
        batch.shape.w != input_.w || batch.shape.n <= 0)
      throw std::invalid_argument(
          "input shape " + batch.shape.str() + " does not match network input " +
          input_.str() + " at layer " +
          (layers_.empty() ? std::string("<head>") : layers_[0]->name()));
    if (batch.shape.numel() != batch.data.size())
      throw std::invalid_argument("tensor data size does not match its shape");
  }

  void forward_train_impl(const Tensor<T>& batch, Rng& rng) {
    check_input(batch);
    acts_.clear();
    acts_.reserve(layers_.size() + 1);
    acts_.push_back(batch);
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      Shape s = shapes_[i];
      s.n = batch.shape.n;
      Tensor<T> next(s);
      layers_[i]->forward_train(acts_.back(), next, rng);
      acts_.push_back(std::move(next));
    }
    softmax_rows(acts_.back());
  }

  void zero_grads() {
    for (auto& v : param_views())
      if (v.grad) std::fill(v.grad, v.grad + v.size, T{0});
  }

  static void softmax_rows(Tensor<T>& logits) {
    const int n = logits.shape.n;
    for (int i = 0; i < n; ++i) {
      T* row = logits.data.data() + static_cast<std::size_t>(i) * kClassCount;
      T m = row[0];
      for (int k = 1; k < kClassCount; ++k) m = std::max(m, row[k]);
      T sum{0};
      for (int k = 0; k < kClassCount; ++k) {
        row[k] = static_cast<T>(std::exp(static_cast<double>(row[k] - m)));
        sum += row[k];
      }
      for (int k = 0; k < kClassCount; ++k) row[k] /= sum;
    }
  }

  NetworkSpec spec_;
  Shape input_{};
  std::vector<std::unique_ptr<Layer<T>>> layers_;
  std::vector<Shape> shapes_;   // per-layer output shapes at n = 1
  std::vector<Tensor<T>> acts_; // train-mode activations, acts_[i] = layer i input
  Tensor<T> input_grad_;        // d(loss)/d(input) from the last backward pass
};

}  // namespace mvap::nn
