#pragma once

#include <torch/torch.h>

#include "discgrade/models.hpp"
#include "discgrade/roi_store.hpp"
#include "discgrade/schedule.hpp"
#include "discgrade/split.hpp"

namespace discgrade {

// The three training loops — contrastive pretraining, supervised fine-tuning,
// ROI regression — plus gradient clipping and the in-memory datasets they
// consume. Everything is deterministic under (config.seed, single worker).

// ---------------------------------------------------------------------------
// Datasets
// ---------------------------------------------------------------------------

/// Standardized representative ROI per disc (resized to the model input size,
/// then (x - mean)/std), in DiscKey order.
struct ClassifierDataset {
  std::vector<ImageF> patches;
  std::vector<int> labels;
  std::vector<DiscKey> keys;
  int input_size = 0;

  std::size_t size() const { return patches.size(); }
};

ClassifierDataset load_classifier_dataset(const RoiStore& store,
                                          const SplitAssignment& split,
                                          Partition partition,
                                          const PreprocessConfig& preprocess,
                                          int input_size);

/// Tensor [n, 1, S, S] for the given dataset indices.
torch::Tensor classifier_batch(const ClassifierDataset& data,
                               const std::vector<int>& indices);

/// 2.5D regression samples: per disc, the standardized slice stack around the
/// annotated slice plus the normalized target coordinates.
struct RegressionDataset {
  struct Item {
    int series = 0;       // index into series_slices
    int slice_index = 0;  // representative slice within the series
    int level = 0;
    float target_x = 0.0f;  // x / src_width
    float target_y = 0.0f;  // y / src_height
    float src_width = 0.0f;
    float src_height = 0.0f;
    DiscKey key;
  };
  std::vector<std::vector<ImageF>> series_slices;  // standardized, input-sized
  std::vector<Item> items;
  int input_size = 0;

  std::size_t size() const { return items.size(); }
};

RegressionDataset load_regression_dataset(const DatasetManifest& manifest,
                                          const fs::path& manifest_csv,
                                          const SplitAssignment& split,
                                          Partition partition,
                                          const PreprocessConfig& preprocess,
                                          int input_size);

/// Tensors ([n,3,S,S] stacks, [n] levels, [n,2] normalized targets).
std::tuple<torch::Tensor, torch::Tensor, torch::Tensor> regression_batch(
    const RegressionDataset& data, const std::vector<int>& indices);

// ---------------------------------------------------------------------------
// Gradient clipping
// ---------------------------------------------------------------------------

/// Scales all gradients by max_norm/g when the global L2 norm g exceeds
/// max_norm; returns the applied factor (1.0 otherwise, including for zero
/// gradients). max_norm = +inf leaves gradients bit-identical.
double clip_gradient_norm(const std::vector<torch::Tensor>& parameters,
                          double max_norm);

// ---------------------------------------------------------------------------
// Stage results
// ---------------------------------------------------------------------------

struct StageResult {
  TrainHistory history;
  fs::path best_checkpoint;
  fs::path last_checkpoint;
  int best_epoch = 0;
};

/// Multi-positive contrastive pretraining: V views per disc per step, NT-Xent
/// at config.tau, gradient-norm clipping, cosine LR over the run. Saves
/// best-val-loss and last checkpoints under out_dir.
StageResult pretrain_contrastive(const RunConfig& config, const RoiStore& store,
                                 const SplitAssignment& split,
                                 const fs::path& out_dir);

/// Differential fine-tuning from a pretrain checkpoint: stem+layer1..3
/// frozen, layer4 at backbone_lr, head at lr, weighted focal loss, plateau
/// scheduler on validation balanced accuracy. No augmentation anywhere on
/// this path.
StageResult finetune_classifier(const RunConfig& config, const RoiStore& store,
                                const SplitAssignment& split,
                                const fs::path& pretrain_ckpt,
                                const fs::path& out_dir);

/// 2.5D coordinate regression with Smooth-L1 on normalized coordinates and a
/// plateau scheduler on validation RMSE (pixels of the source image).
StageResult train_roi_regressor(const RunConfig& config,
                                const DatasetManifest& manifest,
                                const fs::path& manifest_csv,
                                const SplitAssignment& split,
                                const fs::path& out_dir);

}  // namespace discgrade
