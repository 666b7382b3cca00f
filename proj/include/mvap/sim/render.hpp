#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "mvap/attitude.hpp"
#include "mvap/image.hpp"

namespace mvap::sim {

// The five synchronized camera positions.
enum class ViewId { pilot_ws, copilot_ws, pilot_efis, copilot_efis, gauge };

std::string to_string(ViewId v);
ViewId view_from_string(const std::string& name);

enum class RenderStyle { horizon_scene, efis_panel, round_gauge };

// Rectangle in normalized [0,1]^2 coordinates of the nominal camera frame.
struct CropRegion {
  double x = 0.0, y = 0.0, w = 1.0, h = 1.0;
};

struct ViewSpec {
  ViewId view_id = ViewId::pilot_ws;
  int width_px = 64;
  int height_px = 64;
  RenderStyle style = RenderStyle::horizon_scene;
  std::optional<CropRegion> crop_region;  // defaults to full frame
};

// The standard five-view camera rig: full-frame windshields, centered 80%
// crops for the instrument styles.
std::vector<ViewSpec> default_views(int width_px = 64, int height_px = 64);
ViewSpec default_view(ViewId id, int width_px = 64, int height_px = 64);

// Per-view image degradations, applied in fixed order:
// blur -> glare -> darkness -> noise -> occlusion.
struct DegradationSpec {
  double blur_sigma_px = 0.0;
  double glare_strength = 0.0;     // [0,1]
  double darkness = 0.0;           // [0,1]
  double occlusion_fraction = 0.0; // [0,1]; occluder wipes up from the bottom
  double noise_std = 0.0;          // 8-bit units
  std::uint64_t seed = 0;
};

// Rendered per-view image with label and provenance.
struct Frame {
  std::int64_t frame_id = 0;
  ViewId view_id = ViewId::pilot_ws;
  std::int64_t timestamp_ms = 0;
  Image image;
  int label = 0;          // class id, always classify_attitude(truth)
  double pitch_deg = 0.0; // truth
  double roll_deg = 0.0;
};

// Renders one view of the given attitude and applies the degradation chain.
// Bit-exact deterministic for identical (sample, view, degrade) inputs; the
// per-frame noise/glare stream is derived from (degrade.seed, timestamp).
//
// horizon-scene geometry: the sky/ground boundary is the line through the
// image center, rotated by roll and offset along the rotated vertical by
// k * pitch pixels with k = height/40. Instrument styles draw a schematic
// artificial horizon of the same attitude inside a dial.
Frame render_frame(const AttitudeSample& sample, const ViewSpec& view,
                   const DegradationSpec& degrade,
                   const BinningConfig& bin = {});

}  // namespace mvap::sim
