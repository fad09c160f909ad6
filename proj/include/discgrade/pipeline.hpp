#pragma once

#include "discgrade/phantom.hpp"
#include "discgrade/run_config.hpp"

namespace discgrade {

// Stage entry points used by the CLI, plus the run-all orchestration. Every
// stage writes an inputs manifest (config hash + input file hashes) next to
// its outputs so any run is reconstructible.

void write_inputs_manifest(const fs::path& out_dir, const std::string& stage_name,
                           const std::string& config_hash,
                           const std::vector<fs::path>& inputs);

/// gen-phantom: images + manifest under out_dir.
DatasetManifest stage_gen_phantom(const PhantomConfig& config,
                                  const fs::path& out_dir);

/// preprocess: ROI PNG export + index under out_dir.
void stage_preprocess(const fs::path& manifest_csv,
                      const PreprocessConfig& preprocess, const fs::path& out_dir);

/// split: stratified assignment + leakage audit under out_dir (split.csv,
/// split.json, audit.json). Throws DataError if the audit reports violations.
void stage_split(const fs::path& manifest_csv,
                 const std::array<double, 3>& fractions, std::uint64_t seed,
                 const fs::path& out_dir);

void stage_pretrain(const RunConfig& config, const fs::path& preprocess_dir,
                    const fs::path& split_csv, const fs::path& out_dir);

void stage_finetune(const RunConfig& config, const fs::path& preprocess_dir,
                    const fs::path& split_csv, const fs::path& pretrain_ckpt,
                    const fs::path& out_dir);

void stage_train_roi(const RunConfig& config, const fs::path& manifest_csv,
                     const fs::path& split_csv, const fs::path& out_dir);

struct EvaluateArgs {
  fs::path finetune_ckpt;
  fs::path pretrain_ckpt;  // optional; enables the linear probe
  fs::path roi_ckpt;       // optional; enables the regression report
  bool use_predicted_coords = false;
  Partition partition = Partition::Val;
  fs::path manifest_csv;
  fs::path preprocess_dir;
  fs::path split_csv;
  fs::path out_dir;
  int probe_epochs = 40;
  std::uint64_t seed = 0;
};

/// Writes metrics.json, confusion.csv and (with a roi checkpoint)
/// roi_predictions.csv under out_dir.
void stage_evaluate(const EvaluateArgs& args);

void stage_report(const fs::path& run_dir, const fs::path& out_dir);

// ---------------------------------------------------------------------------

struct RunAllSettings {
  fs::path run_dir;
  std::uint64_t seed = 7;
  ModelPreset preset = ModelPreset::Tiny;
  int patients = 200;
  int image_size = 256;
  int slices_per_series = 9;
  std::array<double, 3> fractions{0.70, 0.15, 0.15};
  // Desk-scale epoch budget for the tiny preset; the standard preset uses the
  // published 60/40/40.
  int pretrain_epochs = 12;
  int finetune_epochs = 20;
  int probe_epochs = 40;
  int roi_epochs = 15;
  bool use_predicted_coords = false;
};

struct RunAllSummary {
  fs::path metrics_json;
  double finetuned_balanced_accuracy = 0.0;
  double probe_balanced_accuracy = 0.0;
  double majority_balanced_accuracy = 0.0;
  double severe_to_normal_rate = 0.0;
  double roi_rmse_px = 0.0;
};

/// Chains gen-phantom, preprocess, split, pretrain, finetune, train-roi,
/// evaluate (with probe) and report under run_dir.
RunAllSummary run_all(const RunAllSettings& settings);

}  // namespace discgrade
