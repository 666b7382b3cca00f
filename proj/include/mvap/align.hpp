#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mvap/attitude.hpp"

namespace mvap {

// Ground-truth attitude time series from a flight data recorder export.
struct FdrLog {
  std::vector<AttitudeSample> samples;  // strictly increasing timestamps
};

struct ManifestFrame {
  std::string frame_path;
  std::string view;
  std::int64_t timestamp_ms = 0;
};

struct FrameManifest {
  std::vector<ManifestFrame> frames;  // timestamps need not be sorted
};

struct AlignmentConfig {
  std::int64_t tolerance_ms = 100;  // > 0; ties break toward the earlier sample
};

struct LabeledFrame {
  ManifestFrame frame;
  double pitch_deg = 0.0;
  double roll_deg = 0.0;
  int class_id = 0;
  std::int64_t matched_fdr_ts = 0;
};

struct SkippedFrame {
  std::string frame_path;
  std::int64_t nearest_delta_ms = 0;
};

struct AlignResult {
  std::vector<LabeledFrame> labeled;   // input order
  std::vector<SkippedFrame> skipped;   // input order
};

// Parses `timestamp_ms,pitch_deg,roll_deg` CSV. Rejects a missing header,
// non-numeric fields and non-increasing timestamps, citing the line number.
FdrLog parse_fdr_csv(const std::string& path);
FdrLog parse_fdr_lines(const std::vector<std::string>& lines,
                       const std::string& origin);

// Parses `frame_path,view,timestamp_ms` CSV.
FrameManifest parse_frame_manifest_csv(const std::string& path);

// Matches each frame to the FDR sample with minimal |dt|. Frames whose
// nearest sample is farther than the tolerance are skipped and reported;
// every input frame lands in exactly one of the two result lists. Throws
// on an empty FDR log.
AlignResult align(const FrameManifest& frames, const FdrLog& fdr,
                  const AlignmentConfig& cfg, const BinningConfig& bin = {});

// CSV emitters for the two result lists.
std::string labeled_manifest_csv(const std::vector<LabeledFrame>& rows);
std::string skip_report_csv(const std::vector<SkippedFrame>& rows);

}  // namespace mvap
