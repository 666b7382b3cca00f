#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "mvap/nn/layers.hpp"

namespace mvap::nn {

struct OptimizerConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size = 64;  // desk-scale default; large-run setting is 256

  void validate() const {
    if (!(learning_rate > 0.0))
      throw std::invalid_argument("optimizer: learning_rate must be > 0");
    if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0))
      throw std::invalid_argument("optimizer: betas must be in (0,1)");
    if (!(epsilon > 0.0))
      throw std::invalid_argument("optimizer: epsilon must be > 0");
    if (batch_size < 1)
      throw std::invalid_argument("optimizer: batch_size must be >= 1");
  }
};

// One bias-corrected Adam update over a parameter block, step count t >= 1.
template <typename T>
void adam_update(T* w, const T* g, T* m, T* v, std::size_t n,
                 const OptimizerConfig& cfg, std::int64_t t) {
  if (t < 1) throw std::invalid_argument("adam_update: t must be >= 1");
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < n; ++i) {
    const double gi = static_cast<double>(g[i]);
    const double mi = cfg.beta1 * static_cast<double>(m[i]) + (1.0 - cfg.beta1) * gi;
    const double vi =
        cfg.beta2 * static_cast<double>(v[i]) + (1.0 - cfg.beta2) * gi * gi;
    m[i] = static_cast<T>(mi);
    v[i] = static_cast<T>(vi);
    const double m_hat = mi / bc1;
    const double v_hat = vi / bc2;
    w[i] = static_cast<T>(static_cast<double>(w[i]) -
                          cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon));
  }
}

// Moment state for a fixed set of trainable parameter views.
template <typename T>
class AdamOptimizer {
 public:
  AdamOptimizer(const OptimizerConfig& cfg, const std::vector<ParamView<T>>& views)
      : cfg_(cfg) {
    cfg_.validate();
    for (const auto& v : views)
      if (v.trainable) {
        m_.emplace_back(v.size, T{0});
        v_.emplace_back(v.size, T{0});
        sizes_.push_back(v.size);
      }
  }

  std::int64_t step_count() const { return t_; }

  void step(const std::vector<ParamView<T>>& views) {
    ++t_;
    std::size_t slot = 0;
    for (const auto& view : views) {
      if (!view.trainable) continue;
      if (slot >= sizes_.size() || view.size != sizes_[slot])
        throw std::invalid_argument("adam: parameter shapes changed between steps");
      adam_update(view.value, view.grad, m_[slot].data(), v_[slot].data(),
                  view.size, cfg_, t_);
      ++slot;
    }
    if (slot != sizes_.size())
      throw std::invalid_argument("adam: parameter view count changed");
  }

 private:
  OptimizerConfig cfg_;
  std::int64_t t_ = 0;
  std::vector<std::vector<T>> m_, v_;
  std::vector<std::size_t> sizes_;
};

}  // namespace mvap::nn
