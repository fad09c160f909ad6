// disc-grade: disc-centric severity grading pipeline CLI.
//
// Subcommands cover the full pipeline: gen-phantom, preprocess, split,
// pretrain, finetune, train-roi, evaluate, report, and run-all. Config
// precedence is CLI flags > config file > built-in defaults. Relative paths
// resolve against DISC_GRADE_DATA_DIR when it is set.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>

#include "discgrade/pipeline.hpp"
#include "discgrade/run_config.hpp"

namespace {

using namespace discgrade;

fs::path resolve_data_path(const std::string& p) {
  fs::path path(p);
  if (path.is_absolute()) return path;
  if (const char* root = std::getenv("DISC_GRADE_DATA_DIR")) {
    return fs::path(root) / path;
  }
  return path;
}

struct TrainFlags {
  std::string config_file;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::optional<int> epochs;
  std::optional<int> batch_size;
  std::optional<double> lr;
};

void add_train_flags(CLI::App* cmd, TrainFlags& flags) {
  cmd->add_option("--config", flags.config_file, "Run config JSON file");
  cmd->add_option("--preset", flags.preset, "Model preset (tiny | standard-18)");
  cmd->add_option("--seed", flags.seed, "Random seed");
  cmd->add_option("--epochs", flags.epochs, "Epoch count");
  cmd->add_option("--batch-size", flags.batch_size, "Discs per batch");
  cmd->add_option("--lr", flags.lr, "Base learning rate");
}

RunConfig assemble_config(Stage stage, const TrainFlags& flags) {
  nlohmann::json file_json = nlohmann::json::object();
  if (!flags.config_file.empty()) {
    const fs::path path = resolve_data_path(flags.config_file);
    if (!fs::exists(path)) {
      throw ValidationError("config file not found: " + path.string());
    }
    file_json = nlohmann::json::parse(read_text_file(path));
  }

  ModelPreset preset = ModelPreset::Tiny;
  if (file_json.contains("preset")) {
    preset = preset_from_string(file_json["preset"].get<std::string>());
  }
  if (!flags.preset.empty()) preset = preset_from_string(flags.preset);

  RunConfig config = RunConfig::defaults_for(stage, preset);
  file_json.erase("preset");
  apply_run_config_json(config, file_json);
  config.stage = stage;
  config.preset = preset;
  if (flags.seed) config.seed = *flags.seed;
  if (flags.epochs) config.epochs = *flags.epochs;
  if (flags.batch_size) config.batch_size = *flags.batch_size;
  if (flags.lr) config.lr = *flags.lr;
  config.validate();
  return config;
}

void dump_config(const RunConfig& config, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  write_text_file(out_dir / "config.json",
                  run_config_to_json(config).dump(2) + "\n");
}

int dispatch(int argc, char** argv) {
  CLI::App app{"disc-centric lumbar stenosis grading pipeline"};
  app.require_subcommand(1);

  // --- gen-phantom ---------------------------------------------------------
  auto* gen = app.add_subcommand("gen-phantom", "Render the synthetic dataset");
  PhantomConfig phantom;
  std::string gen_out = "phantom";
  std::vector<double> gen_probs;
  gen->add_option("--patients", phantom.n_patients, "Number of patients");
  gen->add_option("--seed", phantom.seed, "Random seed");
  gen->add_option("--out", gen_out, "Output directory");
  gen->add_option("--image-size", phantom.image_size, "Square slice side");
  gen->add_option("--slices", phantom.slices_per_series, "Slices per series (odd)");
  gen->add_option("--noise-std", phantom.noise_std, "Additive noise fraction");
  gen->add_option("--grade-probs", gen_probs,
                  "Grade probabilities (three values summing to 1)")
      ->expected(3);
  gen->callback([&] {
    if (!gen_probs.empty()) {
      for (int i = 0; i < 3; ++i) phantom.grade_probabilities[i] = gen_probs[i];
    }
    const auto manifest =
        stage_gen_phantom(phantom, resolve_data_path(gen_out));
    std::cout << "wrote " << manifest.records.size() << " annotations under "
              << resolve_data_path(gen_out).string() << "\n";
  });

  // --- preprocess ----------------------------------------------------------
  auto* prep = app.add_subcommand("preprocess", "Export coordinate-guided ROIs");
  std::string prep_manifest, prep_out = "preprocess";
  PreprocessConfig prep_config;
  prep->add_option("--manifest", prep_manifest, "Dataset manifest CSV")->required();
  prep->add_option("--out", prep_out, "Output directory");
  prep->add_option("--roi-size", prep_config.roi_size, "Square ROI side");
  prep->add_option("--pad", prep_config.pad_width, "Constant padding width");
  prep->callback([&] {
    stage_preprocess(resolve_data_path(prep_manifest), prep_config,
                     resolve_data_path(prep_out));
    std::cout << "ROI export complete\n";
  });

  // --- split ---------------------------------------------------------------
  auto* split_cmd = app.add_subcommand("split", "Stratified disc-level split");
  std::string split_manifest, split_out = "split";
  std::uint64_t split_seed = 0;
  std::vector<double> split_fractions;
  split_cmd->add_option("--manifest", split_manifest, "Dataset manifest CSV")
      ->required();
  split_cmd->add_option("--seed", split_seed, "Random seed");
  split_cmd->add_option("--out", split_out, "Output directory");
  split_cmd
      ->add_option("--fractions", split_fractions,
                   "Train/val/test fractions (sum to 1)")
      ->expected(3);
  split_cmd->callback([&] {
    std::array<double, 3> fr{0.70, 0.15, 0.15};
    if (!split_fractions.empty()) {
      for (int i = 0; i < 3; ++i) fr[i] = split_fractions[i];
    }
    stage_split(resolve_data_path(split_manifest), fr, split_seed,
                resolve_data_path(split_out));
    std::cout << "split written\n";
  });

  // --- pretrain ------------------------------------------------------------
  auto* pre = app.add_subcommand("pretrain", "Contrastive pretraining");
  TrainFlags pre_flags;
  std::string pre_rois = "preprocess", pre_split = "split/split.csv",
              pre_out = "pretrain";
  add_train_flags(pre, pre_flags);
  pre->add_option("--preprocess", pre_rois, "Preprocess output directory");
  pre->add_option("--split", pre_split, "Split CSV");
  pre->add_option("--out", pre_out, "Output directory");
  pre->callback([&] {
    RunConfig config = assemble_config(Stage::Pretrain, pre_flags);
    dump_config(config, resolve_data_path(pre_out));
    stage_pretrain(config, resolve_data_path(pre_rois),
                   resolve_data_path(pre_split), resolve_data_path(pre_out));
    std::cout << "pretraining complete\n";
  });

  // --- finetune ------------------------------------------------------------
  auto* fin = app.add_subcommand("finetune", "Supervised fine-tuning");
  TrainFlags fin_flags;
  std::string fin_rois = "preprocess", fin_split = "split/split.csv",
              fin_ckpt, fin_out = "finetune";
  add_train_flags(fin, fin_flags);
  fin->add_option("--preprocess", fin_rois, "Preprocess output directory");
  fin->add_option("--split", fin_split, "Split CSV");
  fin->add_option("--ckpt", fin_ckpt, "Pretrain checkpoint (.pt)")->required();
  fin->add_option("--out", fin_out, "Output directory");
  fin->callback([&] {
    RunConfig config = assemble_config(Stage::Finetune, fin_flags);
    dump_config(config, resolve_data_path(fin_out));
    stage_finetune(config, resolve_data_path(fin_rois),
                   resolve_data_path(fin_split), resolve_data_path(fin_ckpt),
                   resolve_data_path(fin_out));
    std::cout << "fine-tuning complete\n";
  });

  // --- train-roi -----------------------------------------------------------
  auto* roi = app.add_subcommand("train-roi", "Train the coordinate regressor");
  TrainFlags roi_flags;
  std::string roi_manifest, roi_split = "split/split.csv", roi_out = "roi";
  add_train_flags(roi, roi_flags);
  roi->add_option("--manifest", roi_manifest, "Dataset manifest CSV")->required();
  roi->add_option("--split", roi_split, "Split CSV");
  roi->add_option("--out", roi_out, "Output directory");
  roi->callback([&] {
    RunConfig config = assemble_config(Stage::Roi, roi_flags);
    dump_config(config, resolve_data_path(roi_out));
    stage_train_roi(config, resolve_data_path(roi_manifest),
                    resolve_data_path(roi_split), resolve_data_path(roi_out));
    std::cout << "roi training complete\n";
  });

  // --- evaluate --------------------------------------------------------------
  auto* ev = app.add_subcommand("evaluate", "Metrics, probe, regression report");
  std::string ev_ckpt, ev_pretrain, ev_roi, ev_manifest;
  std::string ev_rois = "preprocess", ev_split = "split/split.csv",
              ev_out = "evaluate", ev_partition = "val";
  bool ev_predicted = false;
  int ev_probe_epochs = 40;
  std::uint64_t ev_seed = 0;
  ev->add_option("--ckpt", ev_ckpt, "Finetune checkpoint")->required();
  ev->add_option("--pretrain-ckpt", ev_pretrain,
                 "Pretrain checkpoint (enables the linear probe)");
  ev->add_option("--roi-ckpt", ev_roi,
                 "ROI checkpoint (enables the regression report)");
  ev->add_flag("--use-predicted-coords", ev_predicted,
               "Also evaluate with regressor-predicted crop centers");
  ev->add_option("--manifest", ev_manifest,
                 "Dataset manifest CSV (needed with --roi-ckpt)");
  ev->add_option("--preprocess", ev_rois, "Preprocess output directory");
  ev->add_option("--split", ev_split, "Split CSV");
  ev->add_option("--partition", ev_partition, "Partition to evaluate (val|test)");
  ev->add_option("--probe-epochs", ev_probe_epochs, "Linear probe epochs");
  ev->add_option("--seed", ev_seed, "Random seed for the probe");
  ev->add_option("--out", ev_out, "Output directory");
  ev->callback([&] {
    EvaluateArgs args;
    args.finetune_ckpt = resolve_data_path(ev_ckpt);
    if (!ev_pretrain.empty()) args.pretrain_ckpt = resolve_data_path(ev_pretrain);
    if (!ev_roi.empty()) args.roi_ckpt = resolve_data_path(ev_roi);
    if (!ev_manifest.empty()) args.manifest_csv = resolve_data_path(ev_manifest);
    args.use_predicted_coords = ev_predicted;
    args.partition = partition_from_string(ev_partition);
    args.preprocess_dir = resolve_data_path(ev_rois);
    args.split_csv = resolve_data_path(ev_split);
    args.out_dir = resolve_data_path(ev_out);
    args.probe_epochs = ev_probe_epochs;
    args.seed = ev_seed;
    stage_evaluate(args);
    std::cout << "metrics written to "
              << (args.out_dir / "metrics.json").string() << "\n";
  });

  // --- report ----------------------------------------------------------------
  auto* rep = app.add_subcommand("report", "Render plots from a run directory");
  std::string rep_run, rep_out;
  rep->add_option("--run", rep_run, "Run directory")->required();
  rep->add_option("--out", rep_out, "Output directory (default <run>/report)");
  rep->callback([&] {
    const fs::path run = resolve_data_path(rep_run);
    const fs::path out = rep_out.empty() ? run / "report" : resolve_data_path(rep_out);
    stage_report(run, out);
    std::cout << "report written to " << out.string() << "\n";
  });

  // --- run-all ---------------------------------------------------------------
  auto* all = app.add_subcommand("run-all", "Chain every stage end to end");
  RunAllSettings settings;
  std::string all_out = "run-all";
  std::string all_preset = "tiny";
  bool all_tiny = false;
  all->add_option("--out", all_out, "Run directory");
  all->add_option("--seed", settings.seed, "Master seed");
  all->add_option("--patients", settings.patients, "Phantom patient count");
  all->add_option("--image-size", settings.image_size, "Phantom slice side");
  all->add_option("--preset", all_preset, "Model preset (tiny | standard-18)");
  all->add_flag("--tiny", all_tiny, "Shorthand for --preset tiny");
  all->add_option("--pretrain-epochs", settings.pretrain_epochs,
                  "Tiny-preset pretraining epochs");
  all->add_option("--finetune-epochs", settings.finetune_epochs,
                  "Tiny-preset fine-tuning epochs");
  all->add_option("--probe-epochs", settings.probe_epochs, "Linear probe epochs");
  all->add_option("--roi-epochs", settings.roi_epochs,
                  "Tiny-preset roi regression epochs");
  all->add_flag("--use-predicted-coords", settings.use_predicted_coords,
                "Also evaluate with predicted crop centers");
  all->callback([&] {
    settings.preset = all_tiny ? ModelPreset::Tiny : preset_from_string(all_preset);
    settings.run_dir = resolve_data_path(all_out);
    const RunAllSummary summary = run_all(settings);
    std::cout << "balanced accuracy (fine-tuned): "
              << summary.finetuned_balanced_accuracy << "\n"
              << "balanced accuracy (linear probe): "
              << summary.probe_balanced_accuracy << "\n"
              << "balanced accuracy (majority baseline): "
              << summary.majority_balanced_accuracy << "\n"
              << "severe-to-normal rate: " << summary.severe_to_normal_rate << "\n"
              << "roi rmse (px): " << summary.roi_rmse_px << "\n"
              << "metrics: " << summary.metrics_json.string() << "\n";
  });

  CLI11_PARSE(app, argc, argv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 2;
  }
}
