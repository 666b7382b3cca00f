#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

// Central finite-difference oracle for every layer type, run in 64-bit.
// Each spec under test is wrapped into a small network ending in nine
// logits; the dropout stream is re-seeded per evaluation so the stochastic
// path is identical across perturbed forward passes.

#include <cmath>

#include "mvap/nn/fit.hpp"
#include "mvap/nn/network.hpp"

using namespace mvap;
using namespace mvap::nn;

namespace {

constexpr double kTol = 1e-4;
constexpr std::uint64_t kDropoutSeed = 555;

double train_loss(Network<double>& net, const Tensor<double>& batch,
                  const std::vector<int>& labels) {
  Rng rng(kDropoutSeed);
  const Tensor<double> probs = net.forward(batch, Mode::train, &rng);
  double loss = 0;
  for (int i = 0; i < batch.shape.n; ++i) {
    const double p = std::max(
        static_cast<double>(
            probs.data[static_cast<std::size_t>(i) * kClassCount +
                       static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])]),
        kLogClamp);
    loss -= std::log(p);
  }
  return loss / batch.shape.n;
}

// Relative error with an absolute floor: gradients that are analytically
// zero (e.g. a conv bias feeding batchnorm) see only FD cancellation noise.
double rel_err(double analytic, double fd) {
  const double diff = std::fabs(analytic - fd);
  if (diff <= 1e-8) return 0.0;
  return diff / (std::fabs(analytic) + std::fabs(fd));
}

Tensor<double> random_batch(Shape s, Rng& rng) {
  Tensor<double> t(s);
  for (auto& v : t.data) v = rng.uniform(-1.0, 1.0);
  return t;
}

std::vector<int> random_labels(int n, Rng& rng) {
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (auto& y : labels) y = static_cast<int>(rng.below(kClassCount));
  return labels;
}

// Checks d(loss)/d(theta) for all parameters and d(loss)/d(input) for all
// input elements against central differences.
void check_network(const std::string& spec_text, Shape input,
                   std::uint64_t seed) {
  INFO("spec " << spec_text << " seed " << seed);
  Rng rng(seed);
  Network<double> net(parse_network_spec(spec_text), input);
  Rng init_rng(seed + 1);
  net.init_params(init_rng);

  Tensor<double> batch = random_batch(input, rng);
  const std::vector<int> labels = random_labels(input.n, rng);

  Rng grad_rng(kDropoutSeed);
  net.loss_and_grads(batch, labels, grad_rng);

  // Copy analytic gradients before FD evaluations disturb BN running stats
  // (train-mode loss does not depend on them, so FD itself is unaffected).
  auto views = net.param_views();
  std::vector<std::vector<double>> analytic;
  for (const auto& v : views) {
    if (!v.trainable) continue;
    analytic.emplace_back(v.grad, v.grad + v.size);
  }
  const Tensor<double> input_grad = net.last_input_gradient();

  const double h = 1e-6;
  std::size_t slot = 0;
  for (auto& v : views) {
    if (!v.trainable) continue;
    for (std::size_t i = 0; i < v.size; ++i) {
      const double saved = v.value[i];
      v.value[i] = saved + h;
      const double up = train_loss(net, batch, labels);
      v.value[i] = saved - h;
      const double down = train_loss(net, batch, labels);
      v.value[i] = saved;
      const double fd = (up - down) / (2 * h);
      INFO("param " << v.name << "[" << i << "] analytic "
                    << analytic[slot][i] << " fd " << fd);
      REQUIRE(rel_err(analytic[slot][i], fd) < kTol);
    }
    ++slot;
  }

  for (std::size_t i = 0; i < batch.data.size(); ++i) {
    const double saved = batch.data[i];
    batch.data[i] = saved + h;
    const double up = train_loss(net, batch, labels);
    batch.data[i] = saved - h;
    const double down = train_loss(net, batch, labels);
    batch.data[i] = saved;
    const double fd = (up - down) / (2 * h);
    INFO("input[" << i << "] analytic " << input_grad.data[i] << " fd " << fd);
    REQUIRE(rel_err(input_grad.data[i], fd) < kTol);
  }
}

}  // namespace

TEST_CASE("dense head") {
  for (std::uint64_t seed : {1u, 2u, 3u})
    check_network("flatten-dense(9)", {3, 2, 3, 3}, seed);
}

TEST_CASE("dense-relu-dense") {
  for (std::uint64_t seed : {1u, 2u, 3u})
    check_network("flatten-dense(7)-relu-dense(9)", {2, 1, 4, 4}, seed);
}

TEST_CASE("conv with padding, stride 1") {
  for (std::uint64_t seed : {1u, 2u, 3u})
    check_network("conv(3,3,1,1)-relu-flatten-dense(9)", {2, 2, 5, 5}, seed);
}

TEST_CASE("conv without padding, stride 2") {
  for (std::uint64_t seed : {1u, 2u, 3u})
    check_network("conv(2,2,2,0)-flatten-dense(9)", {2, 3, 6, 6}, seed);
}

TEST_CASE("maxpool") {
  for (std::uint64_t seed : {1u, 2u, 3u})
    check_network("conv(2,3,1,1)-maxpool(2,2)-flatten-dense(9)", {2, 2, 6, 6},
                  seed);
}

TEST_CASE("batchnorm on feature maps") {
  for (std::uint64_t seed : {1u, 2u, 3u})
    check_network("conv(3,3,1,1)-batchnorm(0.1,1e-05)-relu-flatten-dense(9)",
                  {3, 2, 4, 4}, seed);
}

TEST_CASE("batchnorm on flat features") {
  for (std::uint64_t seed : {1u, 2u, 3u})
    check_network("flatten-dense(6)-batchnorm(0.1,1e-05)-dense(9)", {4, 1, 3, 3},
                  seed);
}

TEST_CASE("dropout with a frozen mask") {
  for (std::uint64_t seed : {1u, 2u, 3u})
    check_network("flatten-dropout(0.4)-dense(9)", {3, 1, 4, 4}, seed);
}

TEST_CASE("the default stack end to end") {
  // Miniature tiny-cnn-a: every layer kind in one chain.
  for (std::uint64_t seed : {1u, 2u, 3u})
    check_network(
        "conv(2,3,1,1)-bn-relu-pool2-flatten-dropout(0.25)-dense(8)-relu-dense(9)",
        {2, 2, 6, 6}, seed);
}
