#include "mvap/sim/render.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "mvap/rng.hpp"

namespace mvap::sim {

std::string to_string(ViewId v) {
  switch (v) {
    case ViewId::pilot_ws: return "pilot_ws";
    case ViewId::copilot_ws: return "copilot_ws";
    case ViewId::pilot_efis: return "pilot_efis";
    case ViewId::copilot_efis: return "copilot_efis";
    case ViewId::gauge: return "gauge";
  }
  throw std::logic_error("unreachable view id");
}

ViewId view_from_string(const std::string& name) {
  if (name == "pilot_ws") return ViewId::pilot_ws;
  if (name == "copilot_ws") return ViewId::copilot_ws;
  if (name == "pilot_efis") return ViewId::pilot_efis;
  if (name == "copilot_efis") return ViewId::copilot_efis;
  if (name == "gauge") return ViewId::gauge;
  throw std::invalid_argument("unknown view id: " + name);
}

ViewSpec default_view(ViewId id, int width_px, int height_px) {
  ViewSpec v;
  v.view_id = id;
  v.width_px = width_px;
  v.height_px = height_px;
  switch (id) {
    case ViewId::pilot_ws:
    case ViewId::copilot_ws:
      v.style = RenderStyle::horizon_scene;
      break;
    case ViewId::pilot_efis:
    case ViewId::copilot_efis:
      v.style = RenderStyle::efis_panel;
      v.crop_region = CropRegion{0.1, 0.1, 0.8, 0.8};
      break;
    case ViewId::gauge:
      v.style = RenderStyle::round_gauge;
      v.crop_region = CropRegion{0.1, 0.1, 0.8, 0.8};
      break;
  }
  return v;
}

std::vector<ViewSpec> default_views(int width_px, int height_px) {
  std::vector<ViewSpec> views;
  for (ViewId id : {ViewId::pilot_ws, ViewId::copilot_ws, ViewId::pilot_efis,
                    ViewId::copilot_efis, ViewId::gauge})
    views.push_back(default_view(id, width_px, height_px));
  return views;
}

namespace {

constexpr double kDegToRad = 0.017453292519943295;

struct Rgb {
  float r, g, b;
};

struct Palette {
  Rgb sky, ground;
  Rgb panel{0, 0, 0};
  double disc_radius = 0.44;
  bool mirrored = false;  // co-pilot windshield sees the scene flipped
};

Palette palette_for(ViewId id) {
  switch (id) {
    case ViewId::pilot_ws:
      return {{135, 206, 235}, {101, 84, 55}};
    case ViewId::copilot_ws: {
      Palette p{{125, 198, 240}, {112, 92, 48}};
      p.mirrored = true;
      return p;
    }
    case ViewId::pilot_efis: {
      Palette p{{30, 110, 200}, {150, 105, 45}};
      p.panel = {38, 42, 48};
      p.disc_radius = 0.44;
      return p;
    }
    case ViewId::copilot_efis: {
      Palette p{{24, 100, 190}, {158, 112, 52}};
      p.panel = {46, 48, 54};
      p.disc_radius = 0.42;
      return p;
    }
    case ViewId::gauge: {
      Palette p{{66, 135, 245}, {160, 120, 60}};
      p.panel = {22, 22, 22};
      p.disc_radius = 0.43;
      return p;
    }
  }
  throw std::logic_error("unreachable view id");
}

// Signed distance of (u,v) from the center along the roll-rotated "down"
// axis. The horizon boundary lives at d == pitch * scale; points with
// smaller d are sky.
inline double rotated_down(double u, double v, double cos_r, double sin_r) {
  return (v - 0.5) * cos_r - (u - 0.5) * sin_r;
}

Rgb horizon_scene_color(const Palette& pal, double u, double v,
                        double pitch_deg, double cos_r, double sin_r) {
  const double boundary = pitch_deg / 40.0;  // k = height/40 px per degree
  return rotated_down(u, v, cos_r, sin_r) < boundary ? pal.sky : pal.ground;
}

Rgb instrument_color(const Palette& pal, bool gauge_chrome, double u, double v,
                     double pitch_deg, double cos_r, double sin_r) {
  const double du = u - 0.5, dv = v - 0.5;
  const double r = std::sqrt(du * du + dv * dv);
  const double disc = pal.disc_radius;

  if (r > disc + 0.012) return pal.panel;
  if (r > disc) return gauge_chrome ? Rgb{190, 190, 190} : Rgb{255, 255, 255};

  if (gauge_chrome && r > disc - 0.07) {
    // Fixed bezel tick marks at -60,-30,0,+30,+60 degrees from vertical.
    const double ang = std::atan2(du, -dv) / kDegToRad;
    for (double tick = -60.0; tick <= 60.0; tick += 30.0)
      if (std::fabs(ang - tick) < 2.0) return Rgb{255, 165, 0};
  }

  // Aircraft reference symbol: fixed wings and a center dot.
  const Rgb chrome = gauge_chrome ? Rgb{245, 245, 245} : Rgb{250, 205, 20};
  if (r <= 0.018) return gauge_chrome ? Rgb{255, 140, 0} : chrome;
  if (std::fabs(dv) <= 0.012 && std::fabs(du) >= 0.06 && std::fabs(du) <= 0.20)
    return chrome;

  // Attitude ball: same rotated-split geometry, scaled so +-25 degrees of
  // pitch spans the dial radius.
  const double boundary = pitch_deg * (disc / 25.0);
  return rotated_down(u, v, cos_r, sin_r) < boundary ? pal.sky : pal.ground;
}

void validate(const ViewSpec& view, const DegradationSpec& d) {
  if (view.width_px <= 0 || view.height_px <= 0)
    throw std::invalid_argument("render_frame: non-positive image dimensions");
  if (view.crop_region) {
    const auto& c = *view.crop_region;
    if (!(c.w > 0.0) || !(c.h > 0.0))
      throw std::invalid_argument("render_frame: crop region has empty area");
  }
  auto in01 = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (d.blur_sigma_px < 0.0 || d.noise_std < 0.0 || !in01(d.glare_strength) ||
      !in01(d.darkness) || !in01(d.occlusion_fraction))
    throw std::invalid_argument("render_frame: degradation parameter out of range");
}

void gaussian_blur(std::vector<float>& buf, int w, int h, double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<float> kernel(static_cast<std::size_t>(radius) + 1);
  double sum = 0.0;
  for (int i = 0; i <= radius; ++i) {
    kernel[static_cast<std::size_t>(i)] =
        static_cast<float>(std::exp(-(double)i * i / (2.0 * sigma * sigma)));
    sum += (i == 0 ? 1.0 : 2.0) * kernel[static_cast<std::size_t>(i)];
  }
  for (auto& k : kernel) k = static_cast<float>(k / sum);

  std::vector<float> tmp(buf.size());
  auto at = [&](std::vector<float>& b, int x, int y, int c) -> float& {
    return b[3 * (static_cast<std::size_t>(y) * w + x) + c];
  };
  // Horizontal pass, clamp-to-edge.
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) {
        float acc = kernel[0] * at(buf, x, y, c);
        for (int i = 1; i <= radius; ++i) {
          const int xl = std::max(0, x - i), xr = std::min(w - 1, x + i);
          acc += kernel[static_cast<std::size_t>(i)] *
                 (at(buf, xl, y, c) + at(buf, xr, y, c));
        }
        at(tmp, x, y, c) = acc;
      }
  // Vertical pass.
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) {
        float acc = kernel[0] * at(tmp, x, y, c);
        for (int i = 1; i <= radius; ++i) {
          const int yt = std::max(0, y - i), yb = std::min(h - 1, y + i);
          acc += kernel[static_cast<std::size_t>(i)] *
                 (at(tmp, x, yt, c) + at(tmp, x, yb, c));
        }
        at(buf, x, y, c) = acc;
      }
}

}  // namespace

Frame render_frame(const AttitudeSample& sample, const ViewSpec& view,
                   const DegradationSpec& degrade, const BinningConfig& bin) {
  validate(view, degrade);

  const Palette pal = palette_for(view.view_id);
  const int w = view.width_px, h = view.height_px;
  const CropRegion crop = view.crop_region.value_or(CropRegion{});
  const double cos_r = std::cos(sample.roll_deg * kDegToRad);
  const double sin_r = std::sin(sample.roll_deg * kDegToRad);

  std::vector<float> buf(3 * static_cast<std::size_t>(w) * h);
  std::size_t idx = 0;
  for (int y = 0; y < h; ++y) {
    const double v = crop.y + crop.h * ((y + 0.5) / h);
    for (int x = 0; x < w; ++x) {
      double u = crop.x + crop.w * ((x + 0.5) / w);
      if (pal.mirrored) u = 1.0 - u;
      Rgb c{};
      switch (view.style) {
        case RenderStyle::horizon_scene:
          c = horizon_scene_color(pal, u, v, sample.pitch_deg, cos_r, sin_r);
          break;
        case RenderStyle::efis_panel:
          c = instrument_color(pal, false, u, v, sample.pitch_deg, cos_r, sin_r);
          break;
        case RenderStyle::round_gauge:
          c = instrument_color(pal, true, u, v, sample.pitch_deg, cos_r, sin_r);
          break;
      }
      buf[idx++] = c.r;
      buf[idx++] = c.g;
      buf[idx++] = c.b;
    }
  }

  // Degradation chain, fixed order. The per-frame stream makes noise and
  // glare placement vary across frames while staying reproducible.
  Rng rng(Rng::derive(degrade.seed,
                      static_cast<std::uint64_t>(sample.timestamp_ms)));

  if (degrade.blur_sigma_px > 0.0) gaussian_blur(buf, w, h, degrade.blur_sigma_px);

  if (degrade.glare_strength > 0.0) {
    const double gx = rng.uniform(0.25, 0.75) * w;
    const double gy = rng.uniform(0.25, 0.75) * h;
    const double radius = rng.uniform(0.28, 0.45) * std::min(w, h);
    const float g = static_cast<float>(degrade.glare_strength);
    std::size_t i = 0;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const double dx = (x + 0.5 - gx) / radius, dy = (y + 0.5 - gy) / radius;
        const double q = 1.0 - (dx * dx + dy * dy);
        if (q > 0.0) {
          const float t = g * static_cast<float>(q * q);
          for (int c = 0; c < 3; ++c) {
            float& p = buf[i + static_cast<std::size_t>(c)];
            p += t * (255.0f - p);
          }
        }
        i += 3;
      }
  }

  if (degrade.darkness > 0.0) {
    const float scale = 1.0f - static_cast<float>(degrade.darkness);
    for (auto& p : buf) p *= scale;
  }

  if (degrade.noise_std > 0.0)
    for (auto& p : buf)
      p += static_cast<float>(rng.normal() * degrade.noise_std);

  if (degrade.occlusion_fraction > 0.0) {
    const int rows = static_cast<int>(std::llround(degrade.occlusion_fraction * h));
    for (int y = h - rows; y < h; ++y) {
      if (y < 0) continue;
      for (int x = 0; x < w; ++x) {
        float* p = &buf[3 * (static_cast<std::size_t>(y) * w + x)];
        p[0] = p[1] = p[2] = 82.0f;
      }
    }
  }

  Frame frame;
  frame.view_id = view.view_id;
  frame.timestamp_ms = sample.timestamp_ms;
  frame.pitch_deg = sample.pitch_deg;
  frame.roll_deg = sample.roll_deg;
  frame.label = classify_attitude(sample.pitch_deg, sample.roll_deg, bin).id;
  frame.image.width = w;
  frame.image.height = h;
  frame.image.rgb.resize(buf.size());
  for (std::size_t i = 0; i < buf.size(); ++i) {
    const long q = std::lround(buf[i]);
    frame.image.rgb[i] = static_cast<std::uint8_t>(q < 0 ? 0 : (q > 255 ? 255 : q));
  }
  return frame;
}

}  // namespace mvap::sim
