#include "mvap/align.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

#include "mvap/csv.hpp"

namespace mvap {

FdrLog parse_fdr_lines(const std::vector<std::string>& lines,
                       const std::string& origin) {
  if (lines.empty() || lines[0] != "timestamp_ms,pitch_deg,roll_deg")
    throw ParseError(origin + ":1: missing or malformed header (expected "
                     "'timestamp_ms,pitch_deg,roll_deg')");
  FdrLog log;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::string where = origin + ":" + std::to_string(i + 1);
    const auto fields = split_csv_line(lines[i]);
    if (fields.size() != 3) throw ParseError(where + ": expected 3 fields");
    AttitudeSample s;
    s.timestamp_ms = parse_int(fields[0], where);
    s.pitch_deg = parse_double(fields[1], where);
    s.roll_deg = parse_double(fields[2], where);
    if (s.timestamp_ms < 0)
      throw ParseError(where + ": negative timestamp");
    if (!log.samples.empty() &&
        s.timestamp_ms <= log.samples.back().timestamp_ms)
      throw ParseError(where + ": timestamps must be strictly increasing");
    log.samples.push_back(s);
  }
  return log;
}

FdrLog parse_fdr_csv(const std::string& path) {
  return parse_fdr_lines(read_lines(path), path);
}

FrameManifest parse_frame_manifest_csv(const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.empty() || lines[0] != "frame_path,view,timestamp_ms")
    throw ParseError(path + ":1: missing or malformed header (expected "
                     "'frame_path,view,timestamp_ms')");
  FrameManifest manifest;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::string where = path + ":" + std::to_string(i + 1);
    const auto fields = split_csv_line(lines[i]);
    if (fields.size() != 3) throw ParseError(where + ": expected 3 fields");
    if (fields[0].empty()) throw ParseError(where + ": empty frame_path");
    ManifestFrame f;
    f.frame_path = fields[0];
    f.view = fields[1];
    f.timestamp_ms = parse_int(fields[2], where);
    manifest.frames.push_back(f);
  }
  return manifest;
}

AlignResult align(const FrameManifest& frames, const FdrLog& fdr,
                  const AlignmentConfig& cfg, const BinningConfig& bin) {
  if (fdr.samples.empty())
    throw std::invalid_argument("align: FDR log is empty");
  if (cfg.tolerance_ms <= 0)
    throw std::invalid_argument("align: tolerance_ms must be > 0");

  AlignResult result;
  for (const auto& frame : frames.frames) {
    // Nearest sample by binary search; tie toward the earlier sample.
    const auto it = std::lower_bound(
        fdr.samples.begin(), fdr.samples.end(), frame.timestamp_ms,
        [](const AttitudeSample& s, std::int64_t t) { return s.timestamp_ms < t; });
    const AttitudeSample* best = nullptr;
    if (it == fdr.samples.end()) {
      best = &fdr.samples.back();
    } else if (it == fdr.samples.begin()) {
      best = &*it;
    } else {
      const AttitudeSample* after = &*it;
      const AttitudeSample* before = &*(it - 1);
      const std::int64_t d_before = frame.timestamp_ms - before->timestamp_ms;
      const std::int64_t d_after = after->timestamp_ms - frame.timestamp_ms;
      best = (d_before <= d_after) ? before : after;
    }
    const std::int64_t delta = std::llabs(frame.timestamp_ms - best->timestamp_ms);
    if (delta > cfg.tolerance_ms) {
      result.skipped.push_back({frame.frame_path, delta});
      continue;
    }
    LabeledFrame labeled;
    labeled.frame = frame;
    labeled.pitch_deg = best->pitch_deg;
    labeled.roll_deg = best->roll_deg;
    labeled.class_id = classify_attitude(best->pitch_deg, best->roll_deg, bin).id;
    labeled.matched_fdr_ts = best->timestamp_ms;
    result.labeled.push_back(labeled);
  }
  return result;
}

std::string labeled_manifest_csv(const std::vector<LabeledFrame>& rows) {
  std::ostringstream out;
  out << "frame_path,view,timestamp_ms,pitch_deg,roll_deg,class_id,matched_fdr_ts\n";
  for (const auto& r : rows)
    out << r.frame.frame_path << ',' << r.frame.view << ','
        << r.frame.timestamp_ms << ',' << format_real(r.pitch_deg) << ','
        << format_real(r.roll_deg) << ',' << r.class_id << ','
        << r.matched_fdr_ts << '\n';
  return out.str();
}

std::string skip_report_csv(const std::vector<SkippedFrame>& rows) {
  std::ostringstream out;
  out << "frame_path,nearest_delta_ms\n";
  for (const auto& r : rows)
    out << r.frame_path << ',' << r.nearest_delta_ms << '\n';
  return out.str();
}

}  // namespace mvap
