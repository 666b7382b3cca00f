#pragma once

#include <cstring>
#include <numeric>
#include <optional>
#include <sstream>

#include "mvap/csv.hpp"
#include "mvap/nn/adam.hpp"
#include "mvap/nn/network.hpp"

namespace mvap::nn {

// In-memory labeled image set; images (N,C,H,W), one label per row.
template <typename T>
struct LabeledSet {
  Tensor<T> images;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
};

struct EpochStats {
  int epoch = 0;
  double train_loss = 0, train_acc = 0, test_loss = 0, test_acc = 0;
};

struct FitOptions {
  OptimizerConfig optimizer;
  int epochs = 30;
  std::uint64_t seed = 0;
  // Stop once test accuracy reaches this value (checked after each epoch).
  std::optional<double> early_stop_test_acc;
};

struct FitResult {
  std::vector<EpochStats> log;
};

namespace detail {

template <typename T>
void gather_batch(const LabeledSet<T>& set, std::span<const std::size_t> idx,
                  Tensor<T>& batch, std::vector<int>& labels) {
  const Shape s = set.images.shape;
  const std::size_t stride = static_cast<std::size_t>(s.c) * s.h * s.w;
  batch.shape = {static_cast<int>(idx.size()), s.c, s.h, s.w};
  batch.data.resize(idx.size() * stride);
  labels.resize(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    std::memcpy(batch.data.data() + i * stride,
                set.images.data.data() + idx[i] * stride, stride * sizeof(T));
    labels[i] = set.labels[idx[i]];
  }
}

template <typename T>
std::pair<double, double> evaluate(Network<T>& net, const LabeledSet<T>& set,
                                   int batch_size) {
  if (set.size() == 0)
    return {std::numeric_limits<double>::quiet_NaN(),
            std::numeric_limits<double>::quiet_NaN()};
  double loss_sum = 0;
  std::size_t correct = 0;
  Tensor<T> batch;
  std::vector<int> labels;
  std::vector<std::size_t> idx(set.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t off = 0; off < idx.size();
       off += static_cast<std::size_t>(batch_size)) {
    const std::size_t n =
        std::min<std::size_t>(static_cast<std::size_t>(batch_size), idx.size() - off);
    gather_batch(set, std::span(idx).subspan(off, n), batch, labels);
    const Tensor<T> probs = net.forward_eval(batch);
    for (std::size_t i = 0; i < n; ++i) {
      const T* p = probs.data.data() + i * kClassCount;
      int best = 0;
      for (int k = 1; k < kClassCount; ++k)
        if (p[k] > p[best]) best = k;
      if (best == labels[i]) ++correct;
      const double py = std::max(static_cast<double>(p[labels[i]]), kLogClamp);
      loss_sum -= std::log(py);
    }
  }
  return {loss_sum / static_cast<double>(set.size()),
          static_cast<double>(correct) / static_cast<double>(set.size())};
}

}  // namespace detail

// Seeded end-to-end training: parameter init, per-epoch shuffling and dropout
// masks all derive from opts.seed, so identical calls produce bit-identical
// networks. Requires every class in the training split.
template <typename T>
FitResult fit(Network<T>& net, const LabeledSet<T>& train,
              const LabeledSet<T>& test, const FitOptions& opts) {
  opts.optimizer.validate();
  if (train.size() == 0) throw std::invalid_argument("fit: empty training set");
  {
    std::array<bool, kClassCount> present{};
    for (int y : train.labels) {
      if (y < 0 || y >= kClassCount)
        throw std::invalid_argument("fit: label out of range 0..8");
      present[static_cast<std::size_t>(y)] = true;
    }
    for (int k = 0; k < kClassCount; ++k)
      if (!present[static_cast<std::size_t>(k)])
        throw std::runtime_error("fit: stratification error, class " +
                                 std::to_string(k) +
                                 " missing from training split");
  }

  Rng init_rng(Rng::derive(opts.seed, 0));
  net.init_params(init_rng);

  FitResult result;
  if (opts.epochs == 0) return result;

  AdamOptimizer<T> optimizer(opts.optimizer, net.param_views());
  Rng shuffle_rng(Rng::derive(opts.seed, 1));
  Rng dropout_rng(Rng::derive(opts.seed, 2));

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Tensor<T> batch;
  std::vector<int> labels;

  const int bs = opts.optimizer.batch_size;
  for (int epoch = 1; epoch <= opts.epochs; ++epoch) {
    shuffle(order.begin(), order.end(), shuffle_rng);

    double loss_sum = 0;
    std::size_t correct = 0;
    for (std::size_t off = 0; off < order.size();
         off += static_cast<std::size_t>(bs)) {
      const std::size_t n =
          std::min<std::size_t>(static_cast<std::size_t>(bs), order.size() - off);
      detail::gather_batch(train, std::span(order).subspan(off, n), batch, labels);
      const T loss = net.loss_and_grads(batch, labels, dropout_rng);
      if (!std::isfinite(static_cast<double>(loss)))
        throw std::runtime_error("fit: non-finite loss at epoch " +
                                 std::to_string(epoch));
      loss_sum += static_cast<double>(loss) * static_cast<double>(n);

      const Tensor<T>& probs = net.last_probabilities();
      for (std::size_t i = 0; i < n; ++i) {
        const T* p = probs.data.data() + i * kClassCount;
        int best = 0;
        for (int k = 1; k < kClassCount; ++k)
          if (p[k] > p[best]) best = k;
        if (best == labels[i]) ++correct;
      }
      auto views = net.param_views();
      optimizer.step(views);
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_sum / static_cast<double>(train.size());
    stats.train_acc =
        static_cast<double>(correct) / static_cast<double>(train.size());
    std::tie(stats.test_loss, stats.test_acc) =
        detail::evaluate(net, test, bs);
    result.log.push_back(stats);

    if (opts.early_stop_test_acc && !std::isnan(stats.test_acc) &&
        stats.test_acc >= *opts.early_stop_test_acc)
      break;
  }
  return result;
}

inline std::string training_log_csv(const FitResult& result) {
  std::ostringstream out;
  out << "epoch,train_loss,train_acc,test_loss,test_acc\n";
  for (const auto& e : result.log)
    out << e.epoch << ',' << format_real(e.train_loss) << ','
        << format_real(e.train_acc) << ',' << format_real(e.test_loss) << ','
        << format_real(e.test_acc) << '\n';
  return out.str();
}

}  // namespace mvap::nn
