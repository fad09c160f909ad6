#include "discgrade/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <iostream>

#include "discgrade/evaluation.hpp"
#include "discgrade/report.hpp"
#include "discgrade/roi_store.hpp"
#include "discgrade/schedule.hpp"
#include "discgrade/split.hpp"
#include "discgrade/training.hpp"

namespace discgrade {

namespace {

nlohmann::json eval_to_json(const ClassificationEval& e) {
  nlohmann::json j;
  j["balanced_accuracy"] = e.balanced_accuracy;
  j["overall_accuracy"] = e.overall_accuracy;
  nlohmann::json recalls = nlohmann::json::array();
  for (const auto& r : e.recalls) {
    if (r) recalls.push_back(*r);
    else recalls.push_back(nullptr);
  }
  j["recalls"] = recalls;
  j["severe_to_normal"] = {
      {"rate", e.severe_to_normal ? nlohmann::json(*e.severe_to_normal)
                                  : nlohmann::json(nullptr)},
      {"numerator", e.s2n_counts.numerator},
      {"denominator", e.s2n_counts.denominator},
  };
  nlohmann::json cm = nlohmann::json::array();
  for (int t = 0; t < 3; ++t) {
    cm.push_back({e.cm.counts[t][0], e.cm.counts[t][1], e.cm.counts[t][2]});
  }
  j["confusion"] = cm;
  j["warnings"] = e.warnings;
  return j;
}

void write_confusion_csv(const ConfusionMatrix3& cm, const fs::path& path) {
  std::string csv = "true\\pred,normal,moderate,severe\n";
  static const char* names[3] = {"normal", "moderate", "severe"};
  for (int t = 0; t < 3; ++t) {
    csv += names[t];
    for (int p = 0; p < 3; ++p) {
      csv += "," + std::to_string(cm.counts[t][p]);
    }
    csv += "\n";
  }
  write_text_file(path, csv);
}

fs::path require_exists(const fs::path& p, const char* what) {
  if (!fs::exists(p)) {
    throw ValidationError(std::string(what) + " not found: " + p.string());
  }
  return p;
}

}  // namespace

void write_inputs_manifest(const fs::path& out_dir, const std::string& stage_name,
                           const std::string& config_hash,
                           const std::vector<fs::path>& inputs) {
  nlohmann::json j;
  j["stage"] = stage_name;
  j["config_hash"] = config_hash;
  nlohmann::json files = nlohmann::json::object();
  for (const auto& p : inputs) {
    files[p.string()] = hash_file(p);
  }
  j["input_hashes"] = files;
  write_text_file(out_dir / "inputs_manifest.json", j.dump(2) + "\n");
}

DatasetManifest stage_gen_phantom(const PhantomConfig& config,
                                  const fs::path& out_dir) {
  auto manifest = generate_phantom_dataset(config, out_dir);
  nlohmann::json cfg;
  cfg["n_patients"] = config.n_patients;
  cfg["slices_per_series"] = config.slices_per_series;
  cfg["image_size"] = config.image_size;
  cfg["grade_probabilities"] = config.grade_probabilities;
  cfg["noise_std"] = config.noise_std;
  cfg["seed"] = config.seed;
  write_inputs_manifest(out_dir, "gen-phantom", hex64(fnv1a64(cfg.dump())), {});
  return manifest;
}

void stage_preprocess(const fs::path& manifest_csv,
                      const PreprocessConfig& preprocess, const fs::path& out_dir) {
  require_exists(manifest_csv, "manifest");
  const DatasetManifest manifest = load_manifest(manifest_csv);
  const auto violations =
      validate_manifest(manifest, resolved_image_root(manifest, manifest_csv));
  if (!violations.empty()) {
    std::string msg = "manifest validation failed:\n";
    for (const auto& v : violations) msg += "  " + v + "\n";
    throw ValidationError(msg);
  }
  export_rois(manifest, manifest_csv, preprocess, out_dir);
  nlohmann::json cfg;
  cfg["roi_size"] = preprocess.roi_size;
  cfg["pad_width"] = preprocess.pad_width;
  cfg["pad_value"] = preprocess.pad_value;
  write_inputs_manifest(out_dir, "preprocess", hex64(fnv1a64(cfg.dump())),
                        {manifest_csv});
}

void stage_split(const fs::path& manifest_csv,
                 const std::array<double, 3>& fractions, std::uint64_t seed,
                 const fs::path& out_dir) {
  require_exists(manifest_csv, "manifest");
  const DatasetManifest manifest = load_manifest(manifest_csv);
  const SplitResult result = stratified_disc_split(manifest, fractions, seed);
  fs::create_directories(out_dir);
  save_split(result.assignment, out_dir / "split.csv");

  const AuditReport audit = audit_leakage(result.assignment, manifest);
  nlohmann::json ja;
  ja["violations"] = audit.violations;
  ja["warnings"] = result.warnings;
  nlohmann::json hist = nlohmann::json::object();
  static const char* parts[3] = {"train", "val", "test"};
  static const char* grades[3] = {"normal", "moderate", "severe"};
  for (int p = 0; p < 3; ++p) {
    for (int g = 0; g < 3; ++g) {
      hist[parts[p]][grades[g]] = audit.histogram[p][g];
    }
  }
  ja["histogram"] = hist;
  write_text_file(out_dir / "audit.json", ja.dump(2) + "\n");
  if (!audit.clean()) {
    throw DataError("split audit reported leakage violations; see " +
                    (out_dir / "audit.json").string());
  }

  nlohmann::json cfg;
  cfg["fractions"] = fractions;
  cfg["seed"] = seed;
  write_inputs_manifest(out_dir, "split", hex64(fnv1a64(cfg.dump())),
                        {manifest_csv});
}

void stage_pretrain(const RunConfig& config, const fs::path& preprocess_dir,
                    const fs::path& split_csv, const fs::path& out_dir) {
  require_exists(preprocess_dir / "roi_manifest.csv", "preprocess output");
  require_exists(split_csv, "split");
  const RoiStore store = load_roi_store(preprocess_dir);
  const SplitAssignment split = load_split(split_csv);
  pretrain_contrastive(config, store, split, out_dir);
  write_inputs_manifest(out_dir, "pretrain", config.hash(),
                        {preprocess_dir / "roi_manifest.csv", split_csv});
}

void stage_finetune(const RunConfig& config, const fs::path& preprocess_dir,
                    const fs::path& split_csv, const fs::path& pretrain_ckpt,
                    const fs::path& out_dir) {
  require_exists(preprocess_dir / "roi_manifest.csv", "preprocess output");
  require_exists(split_csv, "split");
  require_exists(pretrain_ckpt, "pretrain checkpoint");
  const RoiStore store = load_roi_store(preprocess_dir);
  const SplitAssignment split = load_split(split_csv);
  finetune_classifier(config, store, split, pretrain_ckpt, out_dir);
  write_inputs_manifest(
      out_dir, "finetune", config.hash(),
      {preprocess_dir / "roi_manifest.csv", split_csv, pretrain_ckpt});
}

void stage_train_roi(const RunConfig& config, const fs::path& manifest_csv,
                     const fs::path& split_csv, const fs::path& out_dir) {
  require_exists(manifest_csv, "manifest");
  require_exists(split_csv, "split");
  const DatasetManifest manifest = load_manifest(manifest_csv);
  const SplitAssignment split = load_split(split_csv);
  train_roi_regressor(config, manifest, manifest_csv, split, out_dir);
  write_inputs_manifest(out_dir, "train-roi", config.hash(),
                        {manifest_csv, split_csv});
}

void stage_evaluate(const EvaluateArgs& args) {
  require_exists(args.finetune_ckpt, "finetune checkpoint");
  require_exists(args.split_csv, "split");
  require_exists(args.preprocess_dir / "roi_manifest.csv", "preprocess output");
  if (args.use_predicted_coords && args.roi_ckpt.empty()) {
    throw ValidationError("--use-predicted-coords requires a roi checkpoint");
  }

  const CheckpointMeta meta = read_checkpoint_meta(args.finetune_ckpt);
  const ModelPreset preset = preset_from_string(meta.preset);
  RunConfig config = RunConfig::defaults_for(Stage::Finetune, preset);
  config.seed = args.seed;

  const RoiStore store = load_roi_store(args.preprocess_dir);
  const SplitAssignment split = load_split(args.split_csv);
  fs::create_directories(args.out_dir);

  nlohmann::json out;
  out["partition"] = partition_to_string(args.partition);

  const ClassificationEval finetuned = evaluate_classifier_checkpoint(
      args.finetune_ckpt, store, split, args.partition, config);
  out["finetuned"] = eval_to_json(finetuned);
  write_confusion_csv(finetuned.cm, args.out_dir / "confusion.csv");

  // Majority-class baseline from the train partition's label distribution.
  {
    const auto train = load_classifier_dataset(store, split, Partition::Train,
                                               config.preprocess,
                                               classifier_input_size(preset));
    const auto eval_data = load_classifier_dataset(store, split, args.partition,
                                                   config.preprocess,
                                                   classifier_input_size(preset));
    const int majority = majority_grade(train.labels);
    const double bal =
        majority_baseline_balanced_accuracy(eval_data.labels, majority);
    out["majority_baseline"] = {
        {"grade", grade_to_string(static_cast<SeverityGrade>(majority))},
        {"balanced_accuracy", bal},
    };
  }

  if (!args.pretrain_ckpt.empty()) {
    require_exists(args.pretrain_ckpt, "pretrain checkpoint");
    ProbeConfig probe;
    probe.epochs = args.probe_epochs;
    probe.seed = args.seed;
    const ProbeResult result =
        linear_probe(args.pretrain_ckpt, store, split, probe, config.preprocess,
                     classifier_input_size(preset));
    out["linear_probe"] = eval_to_json(result.metrics);
    out["linear_probe"]["encoder_delta"] = result.encoder_delta;
    out["linear_probe"]["best_epoch"] = result.best_epoch;
    out["ordering"] = {
        {"finetuned_gt_probe", finetuned.balanced_accuracy >
                                   result.metrics.balanced_accuracy},
        {"probe_gt_majority",
         result.metrics.balanced_accuracy >
             out["majority_baseline"]["balanced_accuracy"].get<double>()},
    };
  }

  if (!args.roi_ckpt.empty()) {
    require_exists(args.roi_ckpt, "roi checkpoint");
    require_exists(args.manifest_csv, "manifest");
    const DatasetManifest manifest = load_manifest(args.manifest_csv);
    RunConfig roi_config = RunConfig::defaults_for(Stage::Roi, preset);
    const RegressionEval reg = evaluate_regressor_checkpoint(
        args.roi_ckpt, manifest, args.manifest_csv, split, args.partition,
        roi_config);
    out["roi"] = {
        {"rmse_px", reg.rmse_px},
        {"rmse_euclidean_px", reg.rmse_euclidean_px},
        {"n", reg.n},
    };

    std::string csv =
        "patient_id,series_id,level,slice_index,gt_x,gt_y,pred_x,pred_y\n";
    for (const auto& p : reg.points) {
      char buf[256];
      std::snprintf(buf, sizeof(buf), "%s,%s,%s,%d,%.4f,%.4f,%.4f,%.4f\n",
                    p.key.patient_id.c_str(), p.key.series_id.c_str(),
                    level_to_string(p.key.level).c_str(), p.slice_index, p.gt_x,
                    p.gt_y, p.pred_x, p.pred_y);
      csv += buf;
    }
    write_text_file(args.out_dir / "roi_predictions.csv", csv);

    if (args.use_predicted_coords) {
      const ClassificationEval pc = evaluate_with_predicted_coords(
          args.finetune_ckpt, reg, manifest, args.manifest_csv, split,
          args.partition, config);
      out["predicted_coords"] = eval_to_json(pc);
    }
  }

  write_text_file(args.out_dir / "metrics.json", out.dump(2) + "\n");

  std::vector<fs::path> inputs = {args.finetune_ckpt, args.split_csv};
  if (!args.pretrain_ckpt.empty()) inputs.push_back(args.pretrain_ckpt);
  if (!args.roi_ckpt.empty()) inputs.push_back(args.roi_ckpt);
  write_inputs_manifest(args.out_dir, "evaluate", config.hash(), inputs);
}

void stage_report(const fs::path& run_dir, const fs::path& out_dir) {
  emit_report(run_dir, out_dir);
  write_inputs_manifest(out_dir, "report", "", {});
}

RunAllSummary run_all(const RunAllSettings& settings) {
  const fs::path& root = settings.run_dir;
  fs::create_directories(root);

  PhantomConfig phantom;
  phantom.n_patients = settings.patients;
  phantom.image_size = settings.image_size;
  phantom.slices_per_series = settings.slices_per_series;
  phantom.seed = derive_seed(settings.seed, 1);
  std::cerr << "[run-all] generating phantom (" << settings.patients
            << " patients)\n";
  stage_gen_phantom(phantom, root / "phantom");

  const fs::path manifest_csv = root / "phantom" / "manifest.csv";
  const bool tiny = settings.preset == ModelPreset::Tiny;

  RunConfig pretrain_cfg =
      RunConfig::defaults_for(Stage::Pretrain, settings.preset);
  pretrain_cfg.seed = derive_seed(settings.seed, 2);
  if (tiny) pretrain_cfg.epochs = settings.pretrain_epochs;

  std::cerr << "[run-all] preprocessing\n";
  stage_preprocess(manifest_csv, pretrain_cfg.preprocess, root / "preprocess");
  std::cerr << "[run-all] splitting\n";
  stage_split(manifest_csv, settings.fractions, derive_seed(settings.seed, 3),
              root / "split");
  const fs::path split_csv = root / "split" / "split.csv";

  std::cerr << "[run-all] contrastive pretraining (" << pretrain_cfg.epochs
            << " epochs)\n";
  stage_pretrain(pretrain_cfg, root / "preprocess", split_csv, root / "pretrain");

  RunConfig finetune_cfg =
      RunConfig::defaults_for(Stage::Finetune, settings.preset);
  finetune_cfg.seed = derive_seed(settings.seed, 4);
  if (tiny) finetune_cfg.epochs = settings.finetune_epochs;
  std::cerr << "[run-all] fine-tuning (" << finetune_cfg.epochs << " epochs)\n";
  stage_finetune(finetune_cfg, root / "preprocess", split_csv,
                 root / "pretrain" / "pretrain_best.pt", root / "finetune");

  RunConfig roi_cfg = RunConfig::defaults_for(Stage::Roi, settings.preset);
  roi_cfg.seed = derive_seed(settings.seed, 5);
  if (tiny) roi_cfg.epochs = settings.roi_epochs;
  std::cerr << "[run-all] roi regression (" << roi_cfg.epochs << " epochs)\n";
  stage_train_roi(roi_cfg, manifest_csv, split_csv, root / "roi");

  std::cerr << "[run-all] evaluating\n";
  EvaluateArgs eval;
  eval.finetune_ckpt = root / "finetune" / "finetune_best.pt";
  eval.pretrain_ckpt = root / "pretrain" / "pretrain_best.pt";
  eval.roi_ckpt = root / "roi" / "roi_best.pt";
  eval.use_predicted_coords = settings.use_predicted_coords;
  eval.partition = Partition::Val;
  eval.manifest_csv = manifest_csv;
  eval.preprocess_dir = root / "preprocess";
  eval.split_csv = split_csv;
  eval.out_dir = root / "evaluate";
  eval.probe_epochs = settings.probe_epochs;
  eval.seed = derive_seed(settings.seed, 6);
  stage_evaluate(eval);

  std::cerr << "[run-all] rendering report\n";
  stage_report(root, root / "report");

  nlohmann::json metrics =
      nlohmann::json::parse(read_text_file(root / "evaluate" / "metrics.json"));
  RunAllSummary summary;
  summary.metrics_json = root / "evaluate" / "metrics.json";
  summary.finetuned_balanced_accuracy =
      metrics["finetuned"]["balanced_accuracy"].get<double>();
  summary.probe_balanced_accuracy =
      metrics["linear_probe"]["balanced_accuracy"].get<double>();
  summary.majority_balanced_accuracy =
      metrics["majority_baseline"]["balanced_accuracy"].get<double>();
  if (!metrics["finetuned"]["severe_to_normal"]["rate"].is_null()) {
    summary.severe_to_normal_rate =
        metrics["finetuned"]["severe_to_normal"]["rate"].get<double>();
  }
  summary.roi_rmse_px = metrics["roi"]["rmse_px"].get<double>();
  return summary;
}

}  // namespace discgrade
