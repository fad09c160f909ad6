#pragma once

#include <nlohmann/json_fwd.hpp>

#include "discgrade/augment.hpp"
#include "discgrade/preprocess.hpp"

namespace discgrade {

// Stage/run configuration shared by the training loops, the CLI, and the
// pipeline orchestrator. Torch-free so non-ML translation units stay light.

enum class ModelPreset { Standard18, Tiny };

std::string preset_to_string(ModelPreset p);
ModelPreset preset_from_string(const std::string& s);

/// Classifier-path input side for a preset (224 standard, 64 tiny).
int classifier_input_size(ModelPreset p);
/// Regressor-path input side (256 standard, 128 tiny). Predictions are
/// normalized coordinates, so targets stay in source-pixel units either way.
int regressor_input_size(ModelPreset p);

enum class Stage { Pretrain, Finetune, Roi };

std::string stage_to_string(Stage s);
Stage stage_from_string(const std::string& s);

enum class OptimizerKind { AdamW, SgdMomentum };
enum class SchedulerKind { Cosine, Plateau };

std::string optimizer_to_string(OptimizerKind k);
OptimizerKind optimizer_from_string(const std::string& s);
std::string scheduler_to_string(SchedulerKind k);
SchedulerKind scheduler_from_string(const std::string& s);

struct RunConfig {
  Stage stage = Stage::Pretrain;
  ModelPreset preset = ModelPreset::Tiny;
  int epochs = 60;
  int batch_size = 32;  // discs per batch
  int num_views = 3;    // contrastive views per disc
  double tau = 0.1;
  OptimizerKind optimizer = OptimizerKind::AdamW;
  double lr = 1e-3;          // base lr; head lr during fine-tuning
  double backbone_lr = 5e-5; // layer4 lr during fine-tuning
  double weight_decay = 1e-4;
  double momentum = 0.9;  // SGD only
  SchedulerKind scheduler = SchedulerKind::Cosine;
  int plateau_patience = 4;
  double plateau_factor = 0.5;
  double plateau_min_delta = 1e-4;
  double clip_max_norm = 1.0;  // <= 0 disables clipping
  std::array<double, 3> focal_alpha{0.8, 4.0, 5.0};
  double focal_gamma = 2.0;
  double smooth_l1_beta = 1.0;
  std::uint64_t seed = 0;
  AugmentPolicy augment{};
  PreprocessConfig preprocess{};
  std::string roi_init_weights;  // optional local weights file, default off

  /// Stage-consistent defaults (epochs 60/40/40, batches 32/24/32, the
  /// published optimizer settings).
  static RunConfig defaults_for(Stage stage, ModelPreset preset);

  void validate() const;

  /// Hash of the canonical JSON form; stamped into checkpoints and input
  /// manifests.
  std::string hash() const;
};

nlohmann::json run_config_to_json(const RunConfig& config);
/// Applies the fields present in `j` onto `config` (file-over-defaults,
/// flags-over-file precedence is built from repeated application).
void apply_run_config_json(RunConfig& config, const nlohmann::json& j);

}  // namespace discgrade
