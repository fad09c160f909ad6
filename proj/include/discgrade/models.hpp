#pragma once

#include <torch/torch.h>

#include <map>
#include <string>
#include <vector>

#include "discgrade/common.hpp"
#include "discgrade/run_config.hpp"

namespace discgrade {

// Network definitions: single-channel residual encoder, projection head,
// permutation-invariant disc classifier, 2.5D coordinate regressor, and the
// freezing / parameter-grouping machinery for differential fine-tuning.

inline constexpr int kFeatureDim = 512;
inline constexpr int kProjectionDim = 128;
inline constexpr int kLevelEmbeddingDim = 32;

// ---------------------------------------------------------------------------

struct BasicBlockImpl : torch::nn::Module {
  BasicBlockImpl(int in_channels, int out_channels, int stride);
  torch::Tensor forward(torch::Tensor x);

  torch::nn::Conv2d conv1{nullptr}, conv2{nullptr};
  torch::nn::BatchNorm2d bn1{nullptr}, bn2{nullptr};
  torch::nn::Sequential downsample{nullptr};
};
TORCH_MODULE(BasicBlock);

/// Residual encoder with the final classification layer absent; global
/// average pooling makes the 512-dim output independent of input size.
/// Stages are registered as stem, layer1..layer4 — the names the freezing
/// machinery keys on.
struct ResNetEncoderImpl : torch::nn::Module {
  ResNetEncoderImpl(ModelPreset preset, int input_channels = 1);

  /// B x C x H x W -> B x 512. Throws ValidationError on a channel mismatch.
  torch::Tensor forward(torch::Tensor x);

  /// Parameters of one named stage; throws ValidationError on unknown names.
  std::vector<torch::Tensor> stage_parameters(const std::string& stage);

  /// Puts the module in train mode but keeps the given stages (and their
  /// batch-norm statistics) in eval mode. Frozen means frozen.
  void train_with_frozen_stages(const std::vector<std::string>& frozen);

  ModelPreset preset;
  int input_channels;
  torch::nn::Sequential stem{nullptr}, layer1{nullptr}, layer2{nullptr},
      layer3{nullptr}, layer4{nullptr};
};
TORCH_MODULE(ResNetEncoder);

/// Two fully connected layers with batch normalization and ReLU between;
/// project() L2-normalizes so the loss receives unit vectors.
struct ProjectionHeadImpl : torch::nn::Module {
  ProjectionHeadImpl(int in_dim = kFeatureDim, int hidden_dim = kFeatureDim,
                     int out_dim = kProjectionDim);
  torch::Tensor forward(torch::Tensor z);

  torch::nn::Linear fc1{nullptr}, fc2{nullptr};
  torch::nn::BatchNorm1d bn{nullptr};
};
TORCH_MODULE(ProjectionHead);

/// forward + unit normalization. Throws NumericError if a row projects to
/// the zero vector.
torch::Tensor project(ProjectionHead& head, const torch::Tensor& z);

/// Deep-Sets mean pooling with a deterministic summation order (vectors are
/// sorted lexicographically before accumulation), so permutations of the set
/// produce bitwise-identical results. S = 1 returns the vector unchanged.
std::vector<float> pool_disc(const std::vector<std::vector<float>>& embeddings);

/// Linear classification head over pooled 512-dim disc representations.
struct DiscHeadImpl : torch::nn::Module {
  explicit DiscHeadImpl(int in_dim = kFeatureDim, int num_classes = 3);
  torch::Tensor forward(torch::Tensor pooled);

  torch::nn::Linear fc{nullptr};
};
TORCH_MODULE(DiscHead);

/// argmax with ties broken toward the lower (less severe) grade.
int predicted_grade(const torch::Tensor& logits_row);
std::vector<int> predicted_grades(const torch::Tensor& logits);

/// 2.5D coordinate regressor: 3-channel backbone, 32-dim level embedding
/// concatenated with the 512 backbone features, fused through a 256-unit
/// layer with 0.5 dropout, sigmoid-squashed to normalized (x, y).
struct RoiRegressorImpl : torch::nn::Module {
  explicit RoiRegressorImpl(ModelPreset preset);
  /// x: B x 3 x H x W, levels: B (int64 in [0,5)) -> B x 2 in (0,1).
  torch::Tensor forward(torch::Tensor x, torch::Tensor levels);

  ResNetEncoder backbone{nullptr};
  torch::nn::Embedding level_embedding{nullptr};
  torch::nn::Linear fuse{nullptr}, out{nullptr};
  torch::nn::Dropout dropout{nullptr};
  ModelPreset preset;
};
TORCH_MODULE(RoiRegressor);

// ---------------------------------------------------------------------------
// Differential fine-tuning
// ---------------------------------------------------------------------------

struct FinetuneParamGroups {
  std::vector<torch::Tensor> frozen;    // requires_grad set to false
  std::vector<torch::Tensor> backbone;  // layer4, low learning rate
  std::vector<torch::Tensor> head;      // classification head, high rate
  double backbone_lr = 5e-5;
  double head_lr = 5e-4;
};

/// Freezes stem+layer1..layer3 (no gradient), groups layer4 at backbone_lr
/// and the head at head_lr. The returned structure is what the optimizer
/// consumes. Unknown stage names in `frozen_stages` raise ValidationError.
FinetuneParamGroups build_finetune_param_groups(
    ResNetEncoder& encoder, DiscHead& head,
    const std::vector<std::string>& frozen_stages = {"stem", "layer1", "layer2",
                                                     "layer3"},
    double backbone_lr = 5e-5, double head_lr = 5e-4);

// ---------------------------------------------------------------------------
// Checkpoints: weights container (.pt) + JSON metadata sidecar, versioned.
// ---------------------------------------------------------------------------

struct CheckpointMeta {
  int format_version = 1;
  std::string stage;   // pretrain | finetune | roi
  std::string preset;  // standard-18 | tiny
  int epoch = 0;
  std::string config_hash;
  std::map<std::string, double> metrics;
};

fs::path checkpoint_meta_path(const fs::path& pt_path);

void save_checkpoint(
    const fs::path& pt_path, const CheckpointMeta& meta,
    const std::vector<std::pair<std::string, std::shared_ptr<torch::nn::Module>>>&
        modules);

CheckpointMeta read_checkpoint_meta(const fs::path& pt_path);

/// Loads named modules from the archive; throws ValidationError when a name
/// is missing (wrong stage / wrong file).
void load_checkpoint(
    const fs::path& pt_path,
    const std::vector<std::pair<std::string, std::shared_ptr<torch::nn::Module>>>&
        modules);

/// Flattened copy of all parameters and buffers, for bit-identity checks.
std::vector<torch::Tensor> snapshot_state(const torch::nn::Module& m);
double max_abs_delta(const std::vector<torch::Tensor>& before,
                     const std::vector<torch::Tensor>& after);

}  // namespace discgrade
