#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "mvap/ensemble.hpp"
#include "mvap/sim/dataset.hpp"
#include "mvap/sim/trajectory.hpp"

using namespace mvap;
using namespace mvap::ensemble;
namespace fs = std::filesystem;

namespace {

std::string temp_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

// Initialized (untrained) model saved per view; deterministic predictions
// are all the ensemble plumbing needs.
struct Rig {
  std::string data_dir;
  std::string model_dir;
  sim::DatasetManifest manifest;
  ModelRegistry registry;
};

Rig build_rig(const std::string& tag, int n_views = 5) {
  Rig rig;
  rig.data_dir = temp_dir("mvap_ens_data_" + tag);
  rig.model_dir = temp_dir("mvap_ens_models_" + tag);

  sim::TrajectoryConfig tcfg;
  tcfg.duration_s = 5.0;
  tcfg.sample_rate_hz = 4.0;
  tcfg.seed = 99;
  const auto traj = sim::simulate_trajectory(tcfg);
  auto views = sim::default_views(24, 24);
  views.resize(static_cast<std::size_t>(n_views));
  rig.manifest = sim::generate_dataset(traj, views, {}, BinningConfig{},
                                       rig.data_dir);

  int i = 0;
  for (const auto& view : views) {
    nn::Network<float> net(nn::parse_network_spec("tiny-mlp"), {1, 3, 24, 24});
    Rng rng(1000 + static_cast<std::uint64_t>(i));
    net.init_params(rng);
    const std::string path =
        rig.model_dir + "/m" + std::to_string(i) + ".ckpt";
    nn::save_checkpoint(net, nn::CheckpointMeta{}, path);
    rig.registry.entries.push_back(
        {"m" + std::to_string(i), view.view_id, path, "tiny-mlp"});
    ++i;
  }
  return rig;
}

}  // namespace

TEST_CASE("registry csv round-trip and validation") {
  const std::string dir = temp_dir("mvap_reg");
  ModelRegistry reg;
  reg.entries.push_back({"m1", sim::ViewId::pilot_ws, "a.ckpt", "tiny-cnn-a"});
  reg.entries.push_back({"m2", sim::ViewId::gauge, "b.ckpt", "tiny-cnn-b"});
  const std::string path = dir + "/registry.csv";
  write_text_file(path, registry_csv(reg));
  const ModelRegistry back = parse_registry_csv(path);
  REQUIRE(back.entries.size() == 2);
  CHECK(back.entries[0].model_id == "m1");
  CHECK(back.entries[1].view == sim::ViewId::gauge);
  CHECK(back.entries[1].arch == "tiny-cnn-b");

  write_text_file(path,
                  "model_id,view,checkpoint_path,arch\nm1,pilot_ws,a,x\n"
                  "m1,gauge,b,y\n");
  CHECK_THROWS_WITH_AS(parse_registry_csv(path), doctest::Contains("duplicate"),
                       ParseError);
  fs::remove_all(dir);
}

TEST_CASE("checkpoints must match their registry architecture tag") {
  Rig rig = build_rig("archcheck", 1);
  rig.registry.entries[0].arch = "tiny-cnn-a";  // actually tiny-mlp
  CHECK_THROWS_WITH_AS(LoadedEnsemble::load(rig.registry, {}),
                       doctest::Contains("does not match"),
                       std::invalid_argument);
}

TEST_CASE("ensemble prediction end to end") {
  Rig rig = build_rig("e2e");
  const FrameTable table = load_frame_table(rig.data_dir, rig.manifest);

  SUBCASE("one record per timestamp, final class among member predictions") {
    auto ensemble = LoadedEnsemble::load(rig.registry, {});
    CHECK(ensemble.members().size() == 5);
    const auto records = ensemble_predict(ensemble, table);
    REQUIRE(records.size() == table.timestamps.size());
    for (const auto& rec : records) {
      REQUIRE(rec.per_model.size() == 5);
      bool appears = false;
      for (const auto& mp : rec.per_model)
        appears |= mp.class_id == rec.final_class;
      CHECK(appears);
    }

    // Independent recount oracle over the stored per-model predictions.
    for (const auto& rec : records) {
      int counts[9] = {};
      double conf[9] = {};
      for (const auto& mp : rec.per_model) {
        counts[mp.class_id] += 1;
        conf[mp.class_id] += mp.confidence;
      }
      int best = 0;
      for (int k = 1; k < 9; ++k)
        if (counts[k] > counts[best] ||
            (counts[k] == counts[best] && conf[k] > conf[best]))
          best = k;
      CHECK(rec.final_class == best);
    }

    const std::string csv = votes_csv(records);
    CHECK(csv.find("timestamp_ms,final_class,decision_rule,pred_m0,pred_m1,"
                   "pred_m2,pred_m3,pred_m4\n") == 0);
  }

  SUBCASE("excluding a view removes its voters") {
    EnsembleConfig cfg;
    cfg.exclude_views = {sim::ViewId::gauge};
    auto ensemble = LoadedEnsemble::load(rig.registry, cfg);
    CHECK(ensemble.members().size() == 4);
    const auto records = ensemble_predict(ensemble, table);
    for (const auto& rec : records) CHECK(rec.per_model.size() == 4);
  }

  SUBCASE("a singleton ensemble equals its one model") {
    EnsembleConfig cfg;
    cfg.include_models = {"m2"};
    auto ensemble = LoadedEnsemble::load(rig.registry, cfg);
    REQUIRE(ensemble.members().size() == 1);
    const auto view = ensemble.members()[0].entry.view;
    const auto records = ensemble_predict(ensemble, table);

    auto solo = nn::load_checkpoint(rig.registry.entries[2].checkpoint_path);
    const auto preds = solo.net.predict(table.views.at(view).images);
    REQUIRE(records.size() == preds.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
      CHECK(records[i].final_class == preds[i].class_id);
      CHECK(records[i].rule == DecisionRule::majority);
    }
  }

  SUBCASE("unknown include id is rejected") {
    EnsembleConfig cfg;
    cfg.include_models = {"m9"};
    CHECK_THROWS_AS(LoadedEnsemble::load(rig.registry, cfg),
                    std::invalid_argument);
  }

  SUBCASE("excluding everything is rejected") {
    EnsembleConfig cfg;
    for (const auto& v : sim::default_views()) cfg.exclude_views.push_back(v.view_id);
    CHECK_THROWS_AS(LoadedEnsemble::load(rig.registry, cfg),
                    std::invalid_argument);
  }

  fs::remove_all(rig.data_dir);
  fs::remove_all(rig.model_dir);
}

TEST_CASE("coverage errors list the missing (timestamp, view) pairs") {
  Rig rig = build_rig("coverage");
  FrameTable table = load_frame_table(rig.data_dir, rig.manifest);

  // Drop one gauge frame.
  auto& gauge = table.views.at(sim::ViewId::gauge);
  const std::int64_t dropped_ts = gauge.timestamps[7];
  gauge.timestamps.erase(gauge.timestamps.begin() + 7);
  gauge.labels.erase(gauge.labels.begin() + 7);
  const std::size_t stride = 3ull * 24 * 24;
  gauge.images.data.erase(gauge.images.data.begin() + 7 * stride,
                          gauge.images.data.begin() + 8 * stride);
  gauge.images.shape.n -= 1;

  auto ensemble = LoadedEnsemble::load(rig.registry, {});
  const std::string expected_pair =
      "(" + std::to_string(dropped_ts) + ", gauge)";
  CHECK_THROWS_WITH_AS(ensemble_predict(ensemble, table),
                       doctest::Contains(expected_pair.c_str()),
                       std::runtime_error);

  fs::remove_all(rig.data_dir);
  fs::remove_all(rig.model_dir);
}

TEST_CASE("unanimous slates decide by majority") {
  Rig rig = build_rig("unanimous", 2);
  // Same checkpoint for both entries: identical predictions, same view ids
  // differ but predictions on their views may differ; instead register the
  // same model twice on the same view.
  rig.registry.entries[1] = rig.registry.entries[0];
  rig.registry.entries[1].model_id = "twin";
  const FrameTable table = load_frame_table(rig.data_dir, rig.manifest);
  auto ensemble = LoadedEnsemble::load(rig.registry, {});
  const auto records = ensemble_predict(ensemble, table);
  for (const auto& rec : records) {
    CHECK(rec.per_model[0].class_id == rec.per_model[1].class_id);
    CHECK(rec.rule == DecisionRule::majority);
  }
  fs::remove_all(rig.data_dir);
  fs::remove_all(rig.model_dir);
}
