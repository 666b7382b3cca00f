#include "mvap/ensemble.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

#include "mvap/csv.hpp"

namespace mvap::ensemble {

ModelRegistry parse_registry_csv(const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.empty() || lines[0] != "model_id,view,checkpoint_path,arch")
    throw ParseError(path + ":1: missing or malformed header (expected "
                     "'model_id,view,checkpoint_path,arch')");
  ModelRegistry registry;
  std::set<std::string> ids;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::string where = path + ":" + std::to_string(i + 1);
    const auto fields = split_csv_line(lines[i]);
    if (fields.size() != 4) throw ParseError(where + ": expected 4 fields");
    if (fields[0].empty()) throw ParseError(where + ": empty model_id");
    if (!ids.insert(fields[0]).second)
      throw ParseError(where + ": duplicate model_id '" + fields[0] + "'");
    RegistryEntry e;
    e.model_id = fields[0];
    e.view = sim::view_from_string(fields[1]);
    e.checkpoint_path = fields[2];
    e.arch = fields[3];
    registry.entries.push_back(e);
  }
  return registry;
}

std::string registry_csv(const ModelRegistry& registry) {
  std::ostringstream out;
  out << "model_id,view,checkpoint_path,arch\n";
  for (const auto& e : registry.entries)
    out << e.model_id << ',' << to_string(e.view) << ',' << e.checkpoint_path
        << ',' << e.arch << '\n';
  return out.str();
}

std::string to_string(DecisionRule rule) {
  switch (rule) {
    case DecisionRule::majority: return "majority";
    case DecisionRule::confidence_tiebreak: return "confidence-tiebreak";
    case DecisionRule::index_tiebreak: return "index-tiebreak";
  }
  throw std::logic_error("unreachable decision rule");
}

VoteOutcome vote(std::span<const nn::Prediction> predictions) {
  if (predictions.empty())
    throw std::invalid_argument("vote: at least one prediction required");

  std::array<int, kNumClasses> counts{};
  std::array<double, kNumClasses> conf_sum{};
  for (const auto& p : predictions) {
    if (p.class_id < 0 || p.class_id >= kNumClasses)
      throw std::invalid_argument("vote: class id out of range 0..8");
    ++counts[static_cast<std::size_t>(p.class_id)];
    conf_sum[static_cast<std::size_t>(p.class_id)] += p.confidence;
  }

  const int top = *std::max_element(counts.begin(), counts.end());
  std::vector<int> tied;
  for (int k = 0; k < kNumClasses; ++k)
    if (counts[static_cast<std::size_t>(k)] == top) tied.push_back(k);
  if (tied.size() == 1) return {tied[0], DecisionRule::majority};

  double best_conf = -1.0;
  for (int k : tied)
    best_conf = std::max(best_conf, conf_sum[static_cast<std::size_t>(k)]);
  std::vector<int> conf_tied;
  for (int k : tied)
    if (conf_sum[static_cast<std::size_t>(k)] == best_conf) conf_tied.push_back(k);
  if (conf_tied.size() == 1)
    return {conf_tied[0], DecisionRule::confidence_tiebreak};
  return {conf_tied[0], DecisionRule::index_tiebreak};  // lowest index
}

LoadedEnsemble LoadedEnsemble::load(const ModelRegistry& registry,
                                    const EnsembleConfig& config) {
  std::set<std::string> ids;
  for (const auto& e : registry.entries)
    if (!ids.insert(e.model_id).second)
      throw std::invalid_argument("registry: duplicate model_id '" +
                                  e.model_id + "'");

  const std::set<std::string> include(config.include_models.begin(),
                                      config.include_models.end());
  for (const auto& id : include)
    if (!ids.count(id))
      throw std::invalid_argument("registry has no model_id '" + id + "'");
  const std::set<sim::ViewId> excluded(config.exclude_views.begin(),
                                       config.exclude_views.end());

  LoadedEnsemble ensemble;
  for (const auto& e : registry.entries) {
    if (!include.empty() && !include.count(e.model_id)) continue;
    if (excluded.count(e.view)) continue;
    auto loaded = nn::load_checkpoint(e.checkpoint_path);
    const std::string tag_canonical = nn::parse_network_spec(e.arch).canonical();
    if (loaded.net.spec().canonical() != tag_canonical)
      throw std::invalid_argument(
          "registry entry '" + e.model_id + "': checkpoint architecture " +
          loaded.net.spec().canonical() + " does not match tag '" + e.arch + "'");
    ensemble.members_.push_back({e, std::move(loaded.net)});
  }
  if (ensemble.members_.empty())
    throw std::invalid_argument("ensemble: no models left after filtering");
  std::sort(ensemble.members_.begin(), ensemble.members_.end(),
            [](const Member& a, const Member& b) {
              return a.entry.model_id < b.entry.model_id;
            });
  return ensemble;
}

namespace {

// Batch-predict one view's frames in timestamp order.
std::vector<nn::Prediction> predict_view(nn::Network<float>& net,
                                         const ViewFrames& frames,
                                         int batch_size) {
  std::vector<nn::Prediction> preds;
  preds.reserve(frames.timestamps.size());
  const nn::Shape s = frames.images.shape;
  const std::size_t stride = static_cast<std::size_t>(s.c) * s.h * s.w;
  for (int off = 0; off < s.n; off += batch_size) {
    const int n = std::min(batch_size, s.n - off);
    nn::Tensor<float> batch;
    batch.shape = {n, s.c, s.h, s.w};
    batch.data.assign(
        frames.images.data.begin() + static_cast<std::size_t>(off) * stride,
        frames.images.data.begin() + (static_cast<std::size_t>(off) + n) * stride);
    for (const auto& p : net.predict(batch)) preds.push_back(p);
  }
  return preds;
}

}  // namespace

std::vector<VoteRecord> ensemble_predict(LoadedEnsemble& ensemble,
                                         const FrameTable& frames,
                                         int batch_size) {
  // Coverage: every member's view must have a frame at every timestamp.
  std::vector<std::string> missing;
  std::set<sim::ViewId> views_needed;
  for (const auto& m : ensemble.members()) views_needed.insert(m.entry.view);
  const std::vector<std::int64_t> no_frames;
  for (const auto view : views_needed) {
    const auto it = frames.views.find(view);
    const std::vector<std::int64_t>& have =
        it == frames.views.end() ? no_frames : it->second.timestamps;
    std::size_t vi = 0;
    for (const auto ts : frames.timestamps) {
      while (vi < have.size() && have[vi] < ts) ++vi;
      if (vi >= have.size() || have[vi] != ts)
        missing.push_back("(" + std::to_string(ts) + ", " + to_string(view) + ")");
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (std::size_t i = 0; i < missing.size() && i < 8; ++i)
      list += (i ? ", " : "") + missing[i];
    if (missing.size() > 8)
      list += ", ... " + std::to_string(missing.size()) + " total";
    throw std::runtime_error("ensemble coverage error, missing frames: " + list);
  }

  // One prediction pass per view per member.
  std::vector<std::vector<nn::Prediction>> member_preds;
  member_preds.reserve(ensemble.members().size());
  for (auto& m : ensemble.members())
    member_preds.push_back(
        predict_view(m.net, frames.views.at(m.entry.view), batch_size));

  std::vector<VoteRecord> records;
  records.reserve(frames.timestamps.size());
  std::vector<nn::Prediction> slate(ensemble.members().size());
  for (std::size_t t = 0; t < frames.timestamps.size(); ++t) {
    VoteRecord rec;
    rec.timestamp_ms = frames.timestamps[t];
    for (std::size_t j = 0; j < ensemble.members().size(); ++j) {
      slate[j] = member_preds[j][t];
      rec.per_model.push_back({ensemble.members()[j].entry.model_id,
                               slate[j].class_id, slate[j].confidence});
    }
    const VoteOutcome outcome = vote(slate);
    rec.final_class = outcome.class_id;
    rec.rule = outcome.rule;
    records.push_back(std::move(rec));
  }
  return records;
}

std::string votes_csv(std::span<const VoteRecord> records) {
  std::ostringstream out;
  out << "timestamp_ms,final_class,decision_rule";
  if (!records.empty())
    for (const auto& mp : records.front().per_model)
      out << ",pred_" << mp.model_id;
  out << '\n';
  for (const auto& rec : records) {
    out << rec.timestamp_ms << ',' << rec.final_class << ','
        << to_string(rec.rule);
    for (const auto& mp : rec.per_model) out << ',' << mp.class_id;
    out << '\n';
  }
  return out.str();
}

}  // namespace mvap::ensemble
