#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mvap/nn/fit.hpp"
#include "mvap/sim/dataset.hpp"

namespace mvap {

// Loads one view's frames from a generated dataset directory into planar
// float tensors (pixel / 255), manifest order.
nn::LabeledSet<float> load_view_set(const std::string& dataset_dir,
                                    const sim::DatasetManifest& manifest,
                                    sim::ViewId view);

struct SplitSets {
  nn::LabeledSet<float> train;
  nn::LabeledSet<float> test;
};

// Seeded stratified split: each class is shuffled and divided separately so
// both sides keep the class mix. train_fraction in (0,1].
SplitSets stratified_split(const nn::LabeledSet<float>& all,
                           double train_fraction, std::uint64_t seed);

// Time-synchronized frames of several views, for ensemble evaluation.
struct ViewFrames {
  std::vector<std::int64_t> timestamps;  // sorted
  nn::Tensor<float> images;              // aligned with timestamps
  std::vector<int> labels;
};

struct FrameTable {
  std::map<sim::ViewId, ViewFrames> views;
  std::vector<std::int64_t> timestamps;  // sorted union across views
  std::vector<int> truth;                // label per union timestamp
};

FrameTable load_frame_table(const std::string& dataset_dir,
                            const sim::DatasetManifest& manifest);

}  // namespace mvap
