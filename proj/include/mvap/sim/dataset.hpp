#pragma once

#include <map>
#include <string>
#include <vector>

#include "mvap/sim/render.hpp"
#include "mvap/sim/trajectory.hpp"

namespace mvap::sim {

struct ManifestRow {
  std::int64_t frame_id = 0;
  ViewId view = ViewId::pilot_ws;
  std::int64_t timestamp_ms = 0;
  double pitch_deg = 0.0;
  double roll_deg = 0.0;
  int class_id = 0;
};

struct DatasetManifest {
  std::vector<ManifestRow> rows;
};

// Relative image path inside a dataset directory: <view>/<frame_id>.ppm
// with the id zero-padded to six digits.
std::string frame_image_relpath(ViewId view, std::int64_t frame_id);

// Renders trajectory x views to out_dir (one PPM per frame plus labels.csv)
// and returns the manifest. Frame ids run sample-major: sample i, view j ->
// i * |views| + j. Throws on I/O failure naming the offending path and on
// duplicate view ids.
DatasetManifest generate_dataset(const Trajectory& traj,
                                 const std::vector<ViewSpec>& views,
                                 const std::map<ViewId, DegradationSpec>& degrades,
                                 const BinningConfig& bin,
                                 const std::string& out_dir);

// labels.csv round-trip.
void write_manifest(const DatasetManifest& manifest, const std::string& path);
DatasetManifest load_manifest(const std::string& dataset_dir);

}  // namespace mvap::sim
