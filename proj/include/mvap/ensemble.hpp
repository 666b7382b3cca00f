#pragma once

#include <span>
#include <string>
#include <vector>

#include "mvap/dataio.hpp"
#include "mvap/nn/checkpoint.hpp"
#include "mvap/sim/render.hpp"

namespace mvap::ensemble {

struct RegistryEntry {
  std::string model_id;
  sim::ViewId view = sim::ViewId::pilot_ws;
  std::string checkpoint_path;
  std::string arch;
};

struct ModelRegistry {
  std::vector<RegistryEntry> entries;
};

// CSV `model_id,view,checkpoint_path,arch`. Parsing enforces unique ids;
// checkpoint/arch agreement is checked at load time.
ModelRegistry parse_registry_csv(const std::string& path);
std::string registry_csv(const ModelRegistry& registry);

enum class DecisionRule { majority, confidence_tiebreak, index_tiebreak };
std::string to_string(DecisionRule rule);

struct VoteOutcome {
  int class_id = 0;
  DecisionRule rule = DecisionRule::majority;
};

// Unweighted majority vote. A strict plurality decides; vote-count ties fall
// to the highest summed confidence among the tied classes; a residual tie
// picks the lowest class index. Throws on empty input.
VoteOutcome vote(std::span<const nn::Prediction> predictions);

struct ModelPrediction {
  std::string model_id;
  int class_id = 0;
  double confidence = 0;
};

struct VoteRecord {
  std::int64_t timestamp_ms = 0;
  std::vector<ModelPrediction> per_model;  // registry order (sorted model_id)
  int final_class = 0;
  DecisionRule rule = DecisionRule::majority;
};

struct EnsembleConfig {
  std::vector<std::string> include_models;   // empty = every registry entry
  std::vector<sim::ViewId> exclude_views;
};

// Registry entries with their checkpoints loaded, filtered by the config and
// sorted by model_id. Immutable after load.
class LoadedEnsemble {
 public:
  struct Member {
    RegistryEntry entry;
    nn::Network<float> net;
  };

  static LoadedEnsemble load(const ModelRegistry& registry,
                             const EnsembleConfig& config);

  const std::vector<Member>& members() const { return members_; }
  std::vector<Member>& members() { return members_; }

 private:
  std::vector<Member> members_;
};

// One VoteRecord per synchronized timestamp. Every member's view must cover
// every timestamp in the table; missing (timestamp, view) pairs raise a
// coverage error listing them.
std::vector<VoteRecord> ensemble_predict(LoadedEnsemble& ensemble,
                                         const FrameTable& frames,
                                         int batch_size = 256);

// `timestamp_ms,final_class,decision_rule` plus one pred_<model_id> column
// per member.
std::string votes_csv(std::span<const VoteRecord> records);

}  // namespace mvap::ensemble
