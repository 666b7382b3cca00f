#include "mvap/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

#include "mvap/csv.hpp"

namespace mvap::eval {

std::int64_t ConfusionMatrix::total() const {
  std::int64_t t = 0;
  for (const auto& row : counts)
    for (std::int64_t c : row) t += c;
  return t;
}

std::array<std::array<double, kNumClasses>, kNumClasses>
ConfusionMatrix::normalized() const {
  std::array<std::array<double, kNumClasses>, kNumClasses> norm{};
  for (int t = 0; t < kNumClasses; ++t) {
    const auto s = support[static_cast<std::size_t>(t)];
    if (s == 0) continue;
    for (int p = 0; p < kNumClasses; ++p)
      norm[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)] =
          static_cast<double>(counts[static_cast<std::size_t>(t)]
                                    [static_cast<std::size_t>(p)]) /
          static_cast<double>(s);
  }
  return norm;
}

std::vector<int> ConfusionMatrix::zero_support_classes() const {
  std::vector<int> zero;
  for (int t = 0; t < kNumClasses; ++t)
    if (support[static_cast<std::size_t>(t)] == 0) zero.push_back(t);
  return zero;
}

ConfusionMatrix ConfusionMatrix::merge(const ConfusionMatrix& a,
                                       const ConfusionMatrix& b) {
  ConfusionMatrix m;
  for (int t = 0; t < kNumClasses; ++t) {
    m.support[static_cast<std::size_t>(t)] =
        a.support[static_cast<std::size_t>(t)] +
        b.support[static_cast<std::size_t>(t)];
    for (int p = 0; p < kNumClasses; ++p)
      m.counts[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)] =
          a.counts[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)] +
          b.counts[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
  }
  return m;
}

ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> pred) {
  if (truth.size() != pred.size() || truth.empty())
    throw std::invalid_argument(
        "confusion: truth/pred must be equal-length and non-empty");
  ConfusionMatrix m;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int t = truth[i], p = pred[i];
    if (t < 0 || t >= kNumClasses || p < 0 || p >= kNumClasses)
      throw std::invalid_argument("confusion: class id out of range 0..8");
    ++m.counts[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
    ++m.support[static_cast<std::size_t>(t)];
  }
  return m;
}

AccuracyReport accuracy_report(const ConfusionMatrix& m) {
  AccuracyReport r;
  r.support = m.support;
  const auto norm = m.normalized();
  std::int64_t trace = 0;
  double macro_sum = 0;
  int macro_n = 0;
  for (int t = 0; t < kNumClasses; ++t) {
    const auto ti = static_cast<std::size_t>(t);
    r.per_class[ti] = norm[ti][ti];
    trace += m.counts[ti][ti];
    if (m.support[ti] > 0) {
      macro_sum += norm[ti][ti];
      ++macro_n;
    }
  }
  const std::int64_t total = m.total();
  r.overall = total > 0 ? static_cast<double>(trace) / static_cast<double>(total) : 0.0;
  r.macro = macro_n > 0 ? macro_sum / macro_n : 0.0;
  return r;
}

std::string confusion_csv(const ConfusionMatrix& m) {
  std::ostringstream out;
  out << "support";
  for (int p = 0; p < kNumClasses; ++p) out << ",pred_" << p;
  out << '\n';
  const auto norm = m.normalized();
  for (int t = 0; t < kNumClasses; ++t) {
    out << m.support[static_cast<std::size_t>(t)];
    for (int p = 0; p < kNumClasses; ++p)
      out << ','
          << format_real(norm[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)]);
    out << '\n';
  }
  return out.str();
}

namespace {

// White -> deep blue ramp.
void cell_color(double v, int& r, int& g, int& b) {
  const double t = std::clamp(v, 0.0, 1.0);
  r = static_cast<int>(std::lround(255 - t * (255 - 26)));
  g = static_cast<int>(std::lround(255 - t * (255 - 62)));
  b = static_cast<int>(std::lround(255 - t * (255 - 112)));
}

}  // namespace

std::string heatmap_svg(const ConfusionMatrix& m, const std::string& title) {
  constexpr int kCell = 48, kLeft = 70, kTop = 64, kRight = 16, kBottom = 54;
  const int width = kLeft + kCell * kNumClasses + kRight;
  const int height = kTop + kCell * kNumClasses + kBottom;
  const auto norm = m.normalized();

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" font-family=\"sans-serif\">\n";
  svg << "<rect width=\"" << width << "\" height=\"" << height
      << "\" fill=\"white\"/>\n";

  std::string full_title = title;
  const auto zero = m.zero_support_classes();
  if (!zero.empty()) {
    full_title += " (zero-support rows:";
    for (std::size_t i = 0; i < zero.size(); ++i)
      full_title += (i ? "," : " ") + std::to_string(zero[i]);
    full_title += ")";
  }
  svg << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
         "font-size=\"15\">" << full_title << "</text>\n";
  svg << "<text x=\"" << kLeft + kCell * kNumClasses / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\" font-size=\"12\">predicted class</text>\n";
  svg << "<text x=\"16\" y=\"" << kTop + kCell * kNumClasses / 2
      << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
      << kTop + kCell * kNumClasses / 2 << ")\">true class</text>\n";

  char buf[16];
  for (int t = 0; t < kNumClasses; ++t) {
    svg << "<text x=\"" << kLeft - 8 << "\" y=\"" << kTop + t * kCell + kCell / 2 + 4
        << "\" text-anchor=\"end\" font-size=\"12\">" << t << "</text>\n";
    svg << "<text x=\"" << kLeft + t * kCell + kCell / 2 << "\" y=\"" << kTop - 8
        << "\" text-anchor=\"middle\" font-size=\"12\">" << t << "</text>\n";
    for (int p = 0; p < kNumClasses; ++p) {
      const double v = norm[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
      int r, g, b;
      cell_color(v, r, g, b);
      const int x = kLeft + p * kCell, y = kTop + t * kCell;
      svg << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << kCell
          << "\" height=\"" << kCell << "\" fill=\"rgb(" << r << ',' << g << ','
          << b << ")\" stroke=\"#ccc\"/>\n";
      std::snprintf(buf, sizeof(buf), "%.2f", v);
      svg << "<text x=\"" << x + kCell / 2 << "\" y=\"" << y + kCell / 2 + 4
          << "\" text-anchor=\"middle\" font-size=\"12\" fill=\""
          << (v > 0.55 ? "white" : "black") << "\">" << buf << "</text>\n";
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

void render_heatmap(const ConfusionMatrix& m, const std::string& title,
                    const std::string& out_path) {
  write_text_file(out_path, heatmap_svg(m, title));
}

std::vector<std::optional<double>> ComparisonTable::column_max() const {
  std::vector<std::optional<double>> best(columns.size());
  for (const auto& row : rows)
    for (std::size_t c = 0; c < columns.size(); ++c)
      if (row.cells[c] && (!best[c] || *row.cells[c] > *best[c]))
        best[c] = row.cells[c];
  return best;
}

std::string ComparisonTable::to_csv() const {
  std::ostringstream out;
  out << "model";
  for (const auto& c : columns) out << ',' << c;
  out << '\n';
  for (const auto& row : rows) {
    out << row.label;
    for (const auto& cell : row.cells)
      out << ',' << (cell ? format_real(*cell) : std::string("-"));
    out << '\n';
  }
  return out.str();
}

std::string ComparisonTable::to_text() const {
  const auto best = column_max();
  std::vector<std::size_t> widths;
  widths.push_back(5);  // "model"
  for (const auto& row : rows) widths[0] = std::max(widths[0], row.label.size());

  auto cell_text = [&](const Row& row, std::size_t c) -> std::string {
    if (!row.cells[c]) return "-";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f%%", *row.cells[c] * 100.0);
    std::string s = buf;
    if (best[c] && *row.cells[c] == *best[c]) s = "*" + s + "*";
    return s;
  };

  for (std::size_t c = 0; c < columns.size(); ++c) {
    std::size_t w = columns[c].size();
    for (const auto& row : rows) w = std::max(w, cell_text(row, c).size());
    widths.push_back(w);
  }

  std::ostringstream out;
  auto pad = [&](const std::string& s, std::size_t w) {
    out << s << std::string(w - s.size() + 2, ' ');
  };
  pad("model", widths[0]);
  for (std::size_t c = 0; c < columns.size(); ++c) pad(columns[c], widths[c + 1]);
  out << '\n';
  for (const auto& row : rows) {
    pad(row.label, widths[0]);
    for (std::size_t c = 0; c < columns.size(); ++c)
      pad(cell_text(row, c), widths[c + 1]);
    out << '\n';
  }
  return out.str();
}

ComparisonTable compare(std::span<const ModelScore> models,
                        std::span<const EnsembleScore> ensembles) {
  if (models.empty() && ensembles.empty())
    throw std::invalid_argument("compare: at least one report required");

  ComparisonTable table;
  const sim::ViewId view_order[] = {
      sim::ViewId::pilot_ws, sim::ViewId::copilot_ws, sim::ViewId::pilot_efis,
      sim::ViewId::copilot_efis, sim::ViewId::gauge};
  for (auto v : view_order) table.columns.push_back(to_string(v));
  table.columns.push_back("ensemble");

  // Cells average the models sharing (arch, view); row order follows first
  // appearance so the table reads like the run that produced it.
  std::vector<std::string> arch_order;
  std::map<std::string, std::array<std::pair<double, int>, 5>> sums;
  for (const auto& m : models) {
    if (!sums.count(m.arch)) arch_order.push_back(m.arch);
    auto& row = sums[m.arch];
    std::size_t col = 0;
    for (std::size_t v = 0; v < 5; ++v)
      if (view_order[v] == m.view) col = v;
    row[col].first += m.accuracy;
    row[col].second += 1;
  }
  for (const auto& arch : arch_order) {
    ComparisonTable::Row row;
    row.label = arch;
    row.cells.assign(6, std::nullopt);
    const auto& cells = sums[arch];
    for (std::size_t v = 0; v < 5; ++v)
      if (cells[v].second > 0) row.cells[v] = cells[v].first / cells[v].second;
    table.rows.push_back(std::move(row));
  }
  for (const auto& e : ensembles) {
    ComparisonTable::Row row;
    row.label = e.label;
    row.cells.assign(6, std::nullopt);
    row.cells[5] = e.accuracy;
    row.is_ensemble = true;
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace mvap::eval
