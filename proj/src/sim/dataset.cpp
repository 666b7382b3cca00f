#include "mvap/sim/dataset.hpp"

#include <cstdio>
#include <filesystem>
#include <set>
#include <sstream>
#include <stdexcept>

#include "mvap/csv.hpp"

namespace mvap::sim {

namespace fs = std::filesystem;

std::string frame_image_relpath(ViewId view, std::int64_t frame_id) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06lld.ppm", static_cast<long long>(frame_id));
  return to_string(view) + "/" + buf;
}

DatasetManifest generate_dataset(const Trajectory& traj,
                                 const std::vector<ViewSpec>& views,
                                 const std::map<ViewId, DegradationSpec>& degrades,
                                 const BinningConfig& bin,
                                 const std::string& out_dir) {
  std::set<ViewId> seen;
  for (const auto& v : views)
    if (!seen.insert(v.view_id).second)
      throw std::invalid_argument("generate_dataset: duplicate view id " +
                                  to_string(v.view_id));

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create directory: " + out_dir);
  for (const auto& v : views) {
    const std::string dir = out_dir + "/" + to_string(v.view_id);
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create directory: " + dir);
  }

  DatasetManifest manifest;
  manifest.rows.reserve(traj.samples.size() * views.size());
  const auto n_views = static_cast<std::int64_t>(views.size());
  for (std::size_t i = 0; i < traj.samples.size(); ++i) {
    const auto& sample = traj.samples[i];
    for (std::size_t j = 0; j < views.size(); ++j) {
      const auto& view = views[j];
      const auto it = degrades.find(view.view_id);
      const DegradationSpec degrade =
          it == degrades.end() ? DegradationSpec{} : it->second;

      Frame frame = render_frame(sample, view, degrade, bin);
      frame.frame_id = static_cast<std::int64_t>(i) * n_views +
                       static_cast<std::int64_t>(j);
      write_ppm(frame.image,
                out_dir + "/" + frame_image_relpath(view.view_id, frame.frame_id));

      ManifestRow row;
      row.frame_id = frame.frame_id;
      row.view = view.view_id;
      row.timestamp_ms = frame.timestamp_ms;
      row.pitch_deg = frame.pitch_deg;
      row.roll_deg = frame.roll_deg;
      row.class_id = frame.label;
      manifest.rows.push_back(row);
    }
  }

  write_manifest(manifest, out_dir + "/labels.csv");
  return manifest;
}

void write_manifest(const DatasetManifest& manifest, const std::string& path) {
  std::ostringstream out;
  out << "frame_id,view,timestamp_ms,pitch_deg,roll_deg,class_id\n";
  for (const auto& r : manifest.rows)
    out << r.frame_id << ',' << to_string(r.view) << ',' << r.timestamp_ms
        << ',' << format_real(r.pitch_deg) << ',' << format_real(r.roll_deg)
        << ',' << r.class_id << '\n';
  write_text_file(path, out.str());
}

DatasetManifest load_manifest(const std::string& dataset_dir) {
  const std::string path = dataset_dir + "/labels.csv";
  const auto lines = read_lines(path);
  if (lines.empty() ||
      lines[0] != "frame_id,view,timestamp_ms,pitch_deg,roll_deg,class_id")
    throw ParseError(path + ":1: missing or malformed header");

  DatasetManifest manifest;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::string where = path + ":" + std::to_string(i + 1);
    const auto fields = split_csv_line(lines[i]);
    if (fields.size() != 6) throw ParseError(where + ": expected 6 fields");
    ManifestRow r;
    r.frame_id = parse_int(fields[0], where);
    r.view = view_from_string(fields[1]);
    r.timestamp_ms = parse_int(fields[2], where);
    r.pitch_deg = parse_double(fields[3], where);
    r.roll_deg = parse_double(fields[4], where);
    r.class_id = static_cast<int>(parse_int(fields[5], where));
    if (r.class_id < 0 || r.class_id >= kNumClasses)
      throw ParseError(where + ": class_id out of range");
    manifest.rows.push_back(r);
  }
  return manifest;
}

}  // namespace mvap::sim
