#pragma once

#include <string>
#include <vector>

namespace mvap::nn {

enum class LayerKind {
  conv,
  relu,
  maxpool,
  batchnorm,
  dropout,
  flatten,
  dense,
  softmax,  // explicit head marker; forward always ends in a softmax
};

struct LayerSpec {
  LayerKind kind = LayerKind::relu;
  int out_ch = 0;   // conv
  int kernel = 0;   // conv / maxpool
  int stride = 1;   // conv / maxpool
  int pad = 0;      // conv
  int out_dim = 0;  // dense
  double rate = 0.0;       // dropout
  double momentum = 0.1;   // batchnorm running-stat update weight
  double epsilon = 1e-5;   // batchnorm
};

struct NetworkSpec {
  std::vector<LayerSpec> layers;

  // Fully-parenthesized single-line form; parse(canonical()) is the identity.
  std::string canonical() const;
};

// Accepts either a named architecture alias or a '-'-separated layer string,
// e.g. "conv(8,3)-bn-relu-pool2-flatten-dense(9)". Token forms:
//   conv(out_ch,k[,stride[,pad]])   defaults: stride 1, pad (k-1)/2
//   maxpool(k[,stride]) | pool(k[,stride]) | pool2
//   batchnorm(momentum,eps) | bn
//   dropout(rate), dense(n), relu, flatten, softmax
// Throws std::invalid_argument with the offending token on bad input.
NetworkSpec parse_network_spec(const std::string& text);

// Named architectures. "tiny-cnn-a" is the default classifier.
std::vector<std::string> arch_aliases();
bool is_arch_alias(const std::string& name);

}  // namespace mvap::nn
