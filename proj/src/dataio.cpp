#include "mvap/dataio.hpp"

#include <algorithm>
#include <stdexcept>

#include "mvap/image.hpp"
#include "mvap/rng.hpp"

namespace mvap {

namespace {

// Interleaved 8-bit RGB -> planar floats in [0,1].
void image_into_row(const Image& img, float* dst) {
  const std::size_t plane = static_cast<std::size_t>(img.width) * img.height;
  for (std::size_t i = 0; i < plane; ++i)
    for (std::size_t c = 0; c < 3; ++c)
      dst[c * plane + i] = static_cast<float>(img.rgb[3 * i + c]) / 255.0f;
}

}  // namespace

nn::LabeledSet<float> load_view_set(const std::string& dataset_dir,
                                    const sim::DatasetManifest& manifest,
                                    sim::ViewId view) {
  std::vector<const sim::ManifestRow*> rows;
  for (const auto& r : manifest.rows)
    if (r.view == view) rows.push_back(&r);
  if (rows.empty())
    throw std::runtime_error("dataset has no frames for view " + to_string(view));

  nn::LabeledSet<float> set;
  const Image first = read_ppm(
      dataset_dir + "/" + sim::frame_image_relpath(view, rows[0]->frame_id));
  const std::size_t stride = 3ull * first.width * first.height;
  set.images.shape = {static_cast<int>(rows.size()), 3, first.height, first.width};
  set.images.data.resize(rows.size() * stride);
  set.labels.resize(rows.size());

  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Image img =
        i == 0 ? first
               : read_ppm(dataset_dir + "/" +
                          sim::frame_image_relpath(view, rows[i]->frame_id));
    if (img.width != first.width || img.height != first.height)
      throw std::runtime_error("inconsistent image dimensions in view " +
                               to_string(view));
    image_into_row(img, set.images.data.data() + i * stride);
    set.labels[i] = rows[i]->class_id;
  }
  return set;
}

SplitSets stratified_split(const nn::LabeledSet<float>& all,
                           double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction <= 1.0))
    throw std::invalid_argument("stratified_split: train_fraction must be in (0,1]");

  std::array<std::vector<std::size_t>, kNumClasses> by_class;
  for (std::size_t i = 0; i < all.labels.size(); ++i)
    by_class[static_cast<std::size_t>(all.labels[i])].push_back(i);

  Rng rng(Rng::derive(seed, 11));
  std::vector<std::size_t> train_idx, test_idx;
  for (auto& idx : by_class) {
    shuffle(idx.begin(), idx.end(), rng);
    // At least one training sample per present class.
    const std::size_t n_train = idx.empty()
        ? 0
        : std::max<std::size_t>(
              1, static_cast<std::size_t>(
                     std::llround(train_fraction * static_cast<double>(idx.size()))));
    for (std::size_t i = 0; i < idx.size(); ++i)
      (i < n_train ? train_idx : test_idx).push_back(idx[i]);
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());

  const nn::Shape s = all.images.shape;
  const std::size_t stride = static_cast<std::size_t>(s.c) * s.h * s.w;
  auto take = [&](const std::vector<std::size_t>& idx) {
    nn::LabeledSet<float> out;
    out.images.shape = {static_cast<int>(idx.size()), s.c, s.h, s.w};
    out.images.data.resize(idx.size() * stride);
    out.labels.resize(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      std::copy_n(all.images.data.data() + idx[i] * stride, stride,
                  out.images.data.data() + i * stride);
      out.labels[i] = all.labels[idx[i]];
    }
    return out;
  };
  return {take(train_idx), take(test_idx)};
}

FrameTable load_frame_table(const std::string& dataset_dir,
                            const sim::DatasetManifest& manifest) {
  FrameTable table;

  std::map<sim::ViewId, std::vector<const sim::ManifestRow*>> rows_by_view;
  std::map<std::int64_t, int> truth_by_ts;
  for (const auto& r : manifest.rows) {
    rows_by_view[r.view].push_back(&r);
    const auto it = truth_by_ts.find(r.timestamp_ms);
    if (it == truth_by_ts.end()) {
      truth_by_ts[r.timestamp_ms] = r.class_id;
    } else if (it->second != r.class_id) {
      throw std::runtime_error(
          "inconsistent labels across views at timestamp " +
          std::to_string(r.timestamp_ms));
    }
  }

  for (auto& [view, rows] : rows_by_view) {
    std::sort(rows.begin(), rows.end(),
              [](const sim::ManifestRow* a, const sim::ManifestRow* b) {
                return a->timestamp_ms < b->timestamp_ms;
              });
    for (std::size_t i = 1; i < rows.size(); ++i)
      if (rows[i]->timestamp_ms == rows[i - 1]->timestamp_ms)
        throw std::runtime_error("duplicate frame for view " + to_string(view) +
                                 " at timestamp " +
                                 std::to_string(rows[i]->timestamp_ms));

    ViewFrames vf;
    const Image first = read_ppm(
        dataset_dir + "/" + sim::frame_image_relpath(view, rows[0]->frame_id));
    const std::size_t stride = 3ull * first.width * first.height;
    vf.images.shape = {static_cast<int>(rows.size()), 3, first.height, first.width};
    vf.images.data.resize(rows.size() * stride);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const Image img =
          i == 0 ? first
                 : read_ppm(dataset_dir + "/" +
                            sim::frame_image_relpath(view, rows[i]->frame_id));
      if (img.width != first.width || img.height != first.height)
        throw std::runtime_error("inconsistent image dimensions in view " +
                                 to_string(view));
      image_into_row(img, vf.images.data.data() + i * stride);
      vf.timestamps.push_back(rows[i]->timestamp_ms);
      vf.labels.push_back(rows[i]->class_id);
    }
    table.views.emplace(view, std::move(vf));
  }

  table.timestamps.reserve(truth_by_ts.size());
  table.truth.reserve(truth_by_ts.size());
  for (const auto& [ts, label] : truth_by_ts) {
    table.timestamps.push_back(ts);
    table.truth.push_back(label);
  }
  return table;
}

}  // namespace mvap
