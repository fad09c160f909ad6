#pragma once

#include <torch/torch.h>

#include "discgrade/metrics.hpp"
#include "discgrade/models.hpp"
#include "discgrade/training.hpp"

namespace discgrade {

// Checkpoint-level evaluation: confusion analysis, the linear-probe protocol,
// and the regression error report. Gating metrics always use ground-truth
// coordinates for cropping; predicted-coordinate evaluation is the optional
// second report.

struct ClassificationEval {
  ConfusionMatrix3 cm;
  double balanced_accuracy = 0.0;
  double overall_accuracy = 0.0;
  std::array<std::optional<double>, kNumGrades> recalls;
  std::optional<double> severe_to_normal;
  SevereToNormal s2n_counts;
  std::vector<std::string> warnings;  // undefined recalls, etc.
};

ClassificationEval summarize_classification(const std::vector<int>& preds,
                                            const std::vector<int>& labels);

/// Evaluates a finetune checkpoint on one partition (ground-truth crops).
ClassificationEval evaluate_classifier_checkpoint(const fs::path& finetune_ckpt,
                                                  const RoiStore& store,
                                                  const SplitAssignment& split,
                                                  Partition partition,
                                                  const RunConfig& config);

struct ProbeConfig {
  int epochs = 40;
  int batch_size = 24;
  double lr = 5e-4;
  double weight_decay = 1e-4;
  std::array<double, 3> focal_alpha{0.8, 4.0, 5.0};
  double focal_gamma = 2.0;
  std::uint64_t seed = 0;
};

struct ProbeResult {
  ClassificationEval metrics;
  double encoder_delta = 0.0;  // max |w_before - w_after|, must be 0
  int best_epoch = 0;
};

/// Trains only a fresh linear head on frozen contrastive features (weighted
/// focal loss, same alpha/gamma), evaluates on val. Frozen-encoder features
/// are extracted once; the encoder is verified bit-identical afterwards.
ProbeResult linear_probe(const fs::path& pretrain_ckpt, const RoiStore& store,
                         const SplitAssignment& split, const ProbeConfig& config,
                         const PreprocessConfig& preprocess, int input_size);

struct RegressionEval {
  double rmse_px = 0.0;            // per-coordinate formula
  double rmse_euclidean_px = 0.0;  // secondary report number
  int n = 0;
  // per-disc predictions for overlays: key, slice, gt and predicted pixels
  struct Point {
    DiscKey key;
    int slice_index = 0;
    double gt_x = 0, gt_y = 0, pred_x = 0, pred_y = 0;
  };
  std::vector<Point> points;
};

RegressionEval evaluate_regressor_checkpoint(const fs::path& roi_ckpt,
                                             const DatasetManifest& manifest,
                                             const fs::path& manifest_csv,
                                             const SplitAssignment& split,
                                             Partition partition,
                                             const RunConfig& config);

/// Re-crops ROIs at regressor-predicted centers and classifies them,
/// mirroring the export path (normalize, pad, crop, 8-bit, standardize).
ClassificationEval evaluate_with_predicted_coords(
    const fs::path& finetune_ckpt, const RegressionEval& regression,
    const DatasetManifest& manifest, const fs::path& manifest_csv,
    const SplitAssignment& split, Partition partition, const RunConfig& config);

}  // namespace discgrade
