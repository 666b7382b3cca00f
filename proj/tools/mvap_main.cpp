// mvap — multi-view attitude prediction toolkit.
//
// Subcommands mirror the pipeline stages:
//   generate       synthetic multi-view labeled dataset
//   annotate       label an external frame manifest against an FDR log
//   train          train one per-view classifier
//   ensemble-eval  majority-vote ensemble evaluation and reports
//
// Every command is deterministic given its flags; commands that consume
// randomness require an explicit --seed.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>

#include "mvap/attitude.hpp"
#include "mvap/align.hpp"
#include "mvap/csv.hpp"
#include "mvap/dataio.hpp"
#include "mvap/ensemble.hpp"
#include "mvap/eval.hpp"
#include "mvap/nn/checkpoint.hpp"
#include "mvap/sim/dataset.hpp"

namespace fs = std::filesystem;
using namespace mvap;

namespace {

struct GenerateArgs {
  double duration_s = 600.0;
  double rate_hz = 4.0;
  std::uint64_t seed = 0;
  std::string out_dir;
  double alpha = 3.0;
  std::vector<std::string> views = {"all"};
  int width = 64, height = 64;
  double pitch_bound = 10.0, roll_bound = 15.0;
  std::vector<std::string> degrade;
};

sim::DegradationSpec parse_degrade_value(const std::string& text,
                                         std::uint64_t default_seed) {
  sim::DegradationSpec d;
  d.seed = default_seed;
  for (const auto& kv : split_csv_line(text)) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("--degrade expects key=value pairs, got '" +
                                  kv + "'");
    const std::string key = kv.substr(0, eq);
    const std::string value = kv.substr(eq + 1);
    if (key == "blur")
      d.blur_sigma_px = parse_double(value, "--degrade blur");
    else if (key == "glare")
      d.glare_strength = parse_double(value, "--degrade glare");
    else if (key == "darkness")
      d.darkness = parse_double(value, "--degrade darkness");
    else if (key == "occlusion")
      d.occlusion_fraction = parse_double(value, "--degrade occlusion");
    else if (key == "noise")
      d.noise_std = parse_double(value, "--degrade noise");
    else if (key == "seed")
      d.seed = static_cast<std::uint64_t>(parse_int(value, "--degrade seed"));
    else
      throw std::invalid_argument("unknown --degrade key '" + key + "'");
  }
  return d;
}

int cmd_generate(const GenerateArgs& args) {
  sim::TrajectoryConfig tcfg;
  tcfg.duration_s = args.duration_s;
  tcfg.sample_rate_hz = args.rate_hz;
  tcfg.seed = args.seed;
  tcfg.pitch_bound_deg = args.pitch_bound;
  tcfg.roll_bound_deg = args.roll_bound;
  const sim::Trajectory traj = sim::simulate_trajectory(tcfg);

  std::vector<sim::ViewSpec> views;
  if (args.views.size() == 1 && args.views[0] == "all") {
    views = sim::default_views(args.width, args.height);
  } else {
    for (const auto& name : args.views)
      views.push_back(sim::default_view(sim::view_from_string(name),
                                        args.width, args.height));
  }

  // Per-view degradation streams derive from the master seed unless a
  // --degrade entry pins its own.
  std::map<sim::ViewId, sim::DegradationSpec> degrades;
  for (std::size_t i = 0; i < views.size(); ++i) {
    sim::DegradationSpec d;
    d.seed = Rng::derive(args.seed, 100 + i);
    degrades[views[i].view_id] = d;
  }
  for (const auto& spec : args.degrade) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos)
      throw std::invalid_argument(
          "--degrade expects <view>:<key>=<value>[,...], got '" + spec + "'");
    const sim::ViewId view = sim::view_from_string(spec.substr(0, colon));
    degrades[view] =
        parse_degrade_value(spec.substr(colon + 1), degrades[view].seed);
  }

  const BinningConfig bin{args.alpha};
  const auto manifest =
      sim::generate_dataset(traj, views, degrades, bin, args.out_dir);

  std::printf("wrote %zu frames (%zu samples x %zu views) to %s\n",
              manifest.rows.size(), traj.samples.size(), views.size(),
              args.out_dir.c_str());
  std::printf("manifest: %s/labels.csv\n", args.out_dir.c_str());
  const auto histogram = class_histogram(traj.samples, bin);
  std::printf("class histogram (per sample):\n");
  for (int k = 0; k < kNumClasses; ++k)
    std::printf("  %d %-6s %lld\n", k,
                std::string(attitude_class(k).short_name).c_str(),
                static_cast<long long>(histogram[static_cast<std::size_t>(k)]));
  return 0;
}

struct AnnotateArgs {
  std::string fdr_csv;
  std::string frames_csv;
  std::string out_dir;
  std::int64_t tolerance_ms = 100;
  double alpha = 3.0;
};

int cmd_annotate(const AnnotateArgs& args) {
  const FdrLog fdr = parse_fdr_csv(args.fdr_csv);
  const FrameManifest frames = parse_frame_manifest_csv(args.frames_csv);
  const AlignResult result =
      align(frames, fdr, AlignmentConfig{args.tolerance_ms},
            BinningConfig{args.alpha});

  fs::create_directories(args.out_dir);
  const std::string labeled_path = args.out_dir + "/labeled.csv";
  const std::string skipped_path = args.out_dir + "/skipped.csv";
  write_text_file(labeled_path, labeled_manifest_csv(result.labeled));
  write_text_file(skipped_path, skip_report_csv(result.skipped));

  std::printf("labeled %zu frames, skipped %zu (tolerance %lld ms)\n",
              result.labeled.size(), result.skipped.size(),
              static_cast<long long>(args.tolerance_ms));
  std::printf("labeled manifest: %s\n", labeled_path.c_str());
  std::printf("skip report: %s\n", skipped_path.c_str());
  return 0;
}

struct TrainArgs {
  std::string data_dir;
  std::string view;
  std::string arch = "tiny-cnn-a";
  std::uint64_t seed = 0;
  std::string out_dir;
  int epochs = 30;
  double lr = 0.001;
  int batch = 64;
  double split = 0.8;
  double early_stop = -1.0;
  std::string registry;
  std::string model_id;
};

int cmd_train(const TrainArgs& args) {
  const sim::ViewId view = sim::view_from_string(args.view);
  const auto manifest = sim::load_manifest(args.data_dir);
  const auto all = load_view_set(args.data_dir, manifest, view);
  const SplitSets split = stratified_split(all, args.split, args.seed);

  const nn::Shape input = {1, all.images.shape.c, all.images.shape.h,
                           all.images.shape.w};
  nn::Network<float> net(nn::parse_network_spec(args.arch), input);

  nn::FitOptions opts;
  opts.epochs = args.epochs;
  opts.seed = args.seed;
  opts.optimizer.learning_rate = args.lr;
  opts.optimizer.batch_size = args.batch;
  if (args.early_stop >= 0.0) opts.early_stop_test_acc = args.early_stop;

  std::printf("training %s on %s: %zu train / %zu test frames, %dx%d\n",
              args.arch.c_str(), args.view.c_str(), split.train.size(),
              split.test.size(), input.w, input.h);
  const nn::FitResult result = fit(net, split.train, split.test, opts);
  for (const auto& e : result.log)
    std::printf("  epoch %2d  train %.4f/%.3f  test %.4f/%.3f\n", e.epoch,
                e.train_loss, e.train_acc, e.test_loss, e.test_acc);

  fs::create_directories(args.out_dir);
  const std::string stem = args.view + "_" + args.arch + "_s" +
                           std::to_string(args.seed);
  const std::string ckpt_path = args.out_dir + "/" + stem + ".ckpt";
  const std::string log_path = args.out_dir + "/" + stem + "_log.csv";

  nn::CheckpointMeta meta;
  meta.seed = args.seed;
  meta.epochs = static_cast<int>(result.log.size());
  if (!result.log.empty()) {
    meta.train_loss = result.log.back().train_loss;
    meta.train_acc = result.log.back().train_acc;
    meta.test_loss = result.log.back().test_loss;
    meta.test_acc = result.log.back().test_acc;
  }
  nn::save_checkpoint(net, meta, ckpt_path);
  write_text_file(log_path, training_log_csv(result));
  std::printf("checkpoint: %s\n", ckpt_path.c_str());
  std::printf("training log: %s\n", log_path.c_str());

  if (!args.registry.empty()) {
    ensemble::ModelRegistry registry;
    if (fs::exists(args.registry))
      registry = ensemble::parse_registry_csv(args.registry);
    ensemble::RegistryEntry entry;
    entry.model_id = args.model_id.empty() ? stem : args.model_id;
    entry.view = view;
    entry.checkpoint_path = ckpt_path;
    entry.arch = args.arch;
    registry.entries.push_back(entry);
    write_text_file(args.registry, ensemble::registry_csv(registry));
    std::printf("registry: %s (+%s)\n", args.registry.c_str(),
                entry.model_id.c_str());
  }
  return 0;
}

struct EnsembleEvalArgs {
  std::string registry;
  std::string data_dir;
  std::string out_dir;
  std::vector<std::string> exclude_views;
  std::vector<std::string> include_models;
  int batch = 256;
};

int cmd_ensemble_eval(const EnsembleEvalArgs& args) {
  const auto registry = ensemble::parse_registry_csv(args.registry);
  ensemble::EnsembleConfig config;
  config.include_models = args.include_models;
  for (const auto& v : args.exclude_views)
    config.exclude_views.push_back(sim::view_from_string(v));

  auto loaded = ensemble::LoadedEnsemble::load(registry, config);
  std::printf("ensemble: %zu voters", loaded.members().size());
  if (!args.exclude_views.empty()) {
    std::printf(" (excluded views:");
    for (const auto& v : args.exclude_views) std::printf(" %s", v.c_str());
    std::printf(")");
  }
  std::printf("\n");

  const auto manifest = sim::load_manifest(args.data_dir);
  const FrameTable table = load_frame_table(args.data_dir, manifest);
  const auto records = ensemble::ensemble_predict(loaded, table, args.batch);

  fs::create_directories(args.out_dir);
  write_text_file(args.out_dir + "/votes.csv", ensemble::votes_csv(records));

  // Per-member and ensemble confusion matrices against the shared truth.
  std::vector<eval::ModelScore> model_scores;
  std::vector<int> ensemble_pred;
  for (const auto& rec : records) ensemble_pred.push_back(rec.final_class);

  for (std::size_t j = 0; j < loaded.members().size(); ++j) {
    const auto& entry = loaded.members()[j].entry;
    std::vector<int> preds;
    preds.reserve(records.size());
    for (const auto& rec : records)
      preds.push_back(rec.per_model[j].class_id);
    const auto matrix = eval::confusion(table.truth, preds);
    const auto report = eval::accuracy_report(matrix);
    model_scores.push_back(
        {entry.model_id, entry.arch, entry.view, report.overall});
    write_text_file(args.out_dir + "/confusion_" + entry.model_id + ".csv",
                    eval::confusion_csv(matrix));
    eval::render_heatmap(matrix,
                         entry.model_id + " (" + to_string(entry.view) + ")",
                         args.out_dir + "/heatmap_" + entry.model_id + ".svg");
  }

  const auto ens_matrix = eval::confusion(table.truth, ensemble_pred);
  const auto ens_report = eval::accuracy_report(ens_matrix);
  write_text_file(args.out_dir + "/confusion_ensemble.csv",
                  eval::confusion_csv(ens_matrix));
  const std::string ens_label =
      "ensemble (" + std::to_string(loaded.members().size()) + " models)";
  eval::render_heatmap(ens_matrix, ens_label,
                       args.out_dir + "/heatmap_ensemble.svg");

  std::vector<eval::EnsembleScore> ens_scores = {
      {ens_label, ens_report.overall}};
  const eval::ComparisonTable comparison = compare(model_scores, ens_scores);
  write_text_file(args.out_dir + "/comparison.csv", comparison.to_csv());

  std::printf("%zu synchronized frames evaluated\n", records.size());
  std::printf("%s", comparison.to_text().c_str());
  std::printf("ensemble accuracy: %.4f (frame-weighted), %.4f (class-averaged)\n",
              ens_report.overall, ens_report.macro);
  std::printf("outputs in %s: votes.csv, comparison.csv, confusion_*.csv, "
              "heatmap_*.svg\n", args.out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-view attitude prediction toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read options from a TOML/INI file");

  GenerateArgs gen;
  auto* generate = app.add_subcommand(
      "generate", "render a labeled synthetic multi-view dataset");
  generate->add_option("--duration", gen.duration_s,
                       "flight duration, seconds")->capture_default_str();
  generate->add_option("--rate", gen.rate_hz, "sample rate, Hz")
      ->capture_default_str();
  generate->add_option("--seed", gen.seed, "master random seed")->required();
  generate->add_option("--out", gen.out_dir, "output dataset directory")
      ->required();
  generate->add_option("--alpha", gen.alpha,
                       "level-band half width, degrees")->capture_default_str();
  generate->add_option("--views", gen.views,
                       "'all' or view names (pilot_ws copilot_ws pilot_efis "
                       "copilot_efis gauge)")->capture_default_str();
  generate->add_option("--width", gen.width, "image width, px")
      ->capture_default_str();
  generate->add_option("--height", gen.height, "image height, px")
      ->capture_default_str();
  generate->add_option("--pitch-bound", gen.pitch_bound,
                       "trajectory |pitch| bound, degrees")->capture_default_str();
  generate->add_option("--roll-bound", gen.roll_bound,
                       "trajectory |roll| bound, degrees")->capture_default_str();
  generate->add_option("--degrade", gen.degrade,
                       "per-view degradations, <view>:k=v[,k=v...]; keys "
                       "blur glare darkness occlusion noise seed");

  AnnotateArgs ann;
  auto* annotate = app.add_subcommand(
      "annotate", "label a frame manifest by FDR timestamp alignment");
  annotate->add_option("--fdr", ann.fdr_csv, "FDR log CSV")->required();
  annotate->add_option("--frames", ann.frames_csv, "frame manifest CSV")
      ->required();
  annotate->add_option("--out", ann.out_dir, "output directory")->required();
  annotate->add_option("--tolerance", ann.tolerance_ms,
                       "max |dt| match tolerance, ms")->capture_default_str();
  annotate->add_option("--alpha", ann.alpha,
                       "level-band half width, degrees")->capture_default_str();

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "train one per-view classifier");
  train->add_option("--data", tr.data_dir, "dataset directory")->required();
  train->add_option("--view", tr.view, "camera view to train on")->required();
  train->add_option("--arch", tr.arch,
                    "architecture alias or layer string")->capture_default_str();
  train->add_option("--seed", tr.seed, "training seed")->required();
  train->add_option("--out", tr.out_dir, "output directory")->required();
  train->add_option("--epochs", tr.epochs, "training epochs")
      ->capture_default_str();
  train->add_option("--lr", tr.lr, "Adam learning rate")->capture_default_str();
  train->add_option("--batch", tr.batch, "batch size (paper setting: 256)")
      ->capture_default_str();
  train->add_option("--split", tr.split, "stratified train fraction")
      ->capture_default_str();
  train->add_option("--early-stop", tr.early_stop,
                    "stop once test accuracy reaches this value");
  train->add_option("--registry", tr.registry,
                    "append the trained model to this registry CSV");
  train->add_option("--model-id", tr.model_id,
                    "registry id (default <view>_<arch>_s<seed>)");

  EnsembleEvalArgs ens;
  auto* ensemble_eval = app.add_subcommand(
      "ensemble-eval", "majority-vote evaluation with reports and heatmaps");
  ensemble_eval->add_option("--registry", ens.registry, "model registry CSV")
      ->required();
  ensemble_eval->add_option("--data", ens.data_dir, "dataset directory")
      ->required();
  ensemble_eval->add_option("--out", ens.out_dir, "output directory")
      ->required();
  ensemble_eval->add_option("--exclude-view", ens.exclude_views,
                            "drop all models of this view (repeatable)");
  ensemble_eval->add_option("--include-model", ens.include_models,
                            "restrict to these model ids (repeatable)");
  ensemble_eval->add_option("--batch", ens.batch, "inference batch size")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) return cmd_generate(gen);
    if (annotate->parsed()) return cmd_annotate(ann);
    if (train->parsed()) return cmd_train(tr);
    if (ensemble_eval->parsed()) return cmd_ensemble_eval(ens);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
