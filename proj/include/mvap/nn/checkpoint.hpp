#pragma once

#include <cstdint>
#include <string>

#include "mvap/nn/fit.hpp"
#include "mvap/nn/network.hpp"

namespace mvap::nn {

struct CheckpointMeta {
  std::uint64_t seed = 0;
  int epochs = 0;
  double train_loss = 0, train_acc = 0, test_loss = 0, test_acc = 0;
};

struct LoadedCheckpoint {
  Network<float> net;
  CheckpointMeta meta;
};

// Structured-text header (format version, canonical architecture, input
// shape, training metadata, per-tensor sizes, blob byte count) followed by
// the raw little-endian float32 parameter blob in param_views() order.
// Blob offsets are derivable from the header alone; save/load round-trips
// are bit-exact.
void save_checkpoint(Network<float>& net, const CheckpointMeta& meta,
                     const std::string& path);
LoadedCheckpoint load_checkpoint(const std::string& path);

// Canonical architecture string recorded in a checkpoint header, without
// loading the parameter blob.
std::string checkpoint_arch(const std::string& path);

}  // namespace mvap::nn
