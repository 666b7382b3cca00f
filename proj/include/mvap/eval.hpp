#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mvap/attitude.hpp"
#include "mvap/sim/render.hpp"

namespace mvap::eval {

// (true, predicted) counts over the nine classes, with row-normalized view.
// Rows are normalized by their true-class support, so the diagonal reads as
// per-class recall; zero-support rows stay all-zero and are flagged.
struct ConfusionMatrix {
  std::array<std::array<std::int64_t, kNumClasses>, kNumClasses> counts{};
  std::array<std::int64_t, kNumClasses> support{};

  std::int64_t total() const;
  std::array<std::array<double, kNumClasses>, kNumClasses> normalized() const;
  std::vector<int> zero_support_classes() const;

  static ConfusionMatrix merge(const ConfusionMatrix& a, const ConfusionMatrix& b);
};

ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> pred);

struct AccuracyReport {
  double overall = 0;  // trace/total, frame-weighted (headline number)
  double macro = 0;    // unweighted mean recall over classes with support
  std::array<double, kNumClasses> per_class{};
  std::array<std::int64_t, kNumClasses> support{};
};

AccuracyReport accuracy_report(const ConfusionMatrix& m);

// support column + 9 normalized columns, one row per true class.
std::string confusion_csv(const ConfusionMatrix& m);

// Self-contained SVG heatmap; each cell is annotated with its normalized
// value to two decimals. Zero-support rows are noted in the title.
std::string heatmap_svg(const ConfusionMatrix& m, const std::string& title);
void render_heatmap(const ConfusionMatrix& m, const std::string& title,
                    const std::string& out_path);

// One evaluated single-view model.
struct ModelScore {
  std::string model_id;
  std::string arch;
  sim::ViewId view = sim::ViewId::pilot_ws;
  double accuracy = 0;
};

struct EnsembleScore {
  std::string label;
  double accuracy = 0;
};

// Accuracy comparison: one row per architecture, one column per camera
// view, ensemble rows last. Cells average the scores of models sharing
// (arch, view).
struct ComparisonTable {
  std::vector<std::string> columns;  // five views then "ensemble"
  struct Row {
    std::string label;
    std::vector<std::optional<double>> cells;
    bool is_ensemble = false;
  };
  std::vector<Row> rows;

  std::vector<std::optional<double>> column_max() const;
  std::string to_csv() const;
  // Console rendering; per-column maxima are wrapped in '*'.
  std::string to_text() const;
};

ComparisonTable compare(std::span<const ModelScore> models,
                        std::span<const EnsembleScore> ensembles);

}  // namespace mvap::eval
