#pragma once

#include <torch/torch.h>

#include <array>
#include <cstdint>
#include <vector>

namespace discgrade {

// Numerical kernels for training: cosine similarity, multi-positive NT-Xent,
// weighted focal loss, Smooth-L1. All differentiable through autograd and
// dtype-generic (float32 for training, float64 for gradient checks).

/// Projected embeddings plus the disc identity of each row. Rows are
/// L2-normalized inside the loss; zero-norm rows are rejected, not fudged.
struct EmbeddingBatch {
  torch::Tensor z;                      // N x D
  std::vector<std::int64_t> group_ids;  // disc identity per row
  double tau = 0.1;                     // temperature, > 0
};

/// S[i,j] = <z_i, z_j> / (|z_i| |z_j|); symmetric, unit diagonal.
/// Throws NumericError on zero-norm rows.
torch::Tensor cosine_similarity_matrix(const torch::Tensor& z);

/// Multi-positive NT-Xent: for each anchor, positives are the same-group rows
/// (self excluded) and the denominator runs over every other row in the
/// batch. Per-anchor losses are averaged over anchors that have at least one
/// positive; evaluation goes through log-sum-exp for stability. Throws
/// NumericError when every group is a singleton (loss undefined).
torch::Tensor multi_positive_ntxent(const EmbeddingBatch& batch);

struct FocalParams {
  std::array<double, 3> alpha{0.8, 4.0, 5.0};  // per-class weights
  double gamma = 2.0;                          // focusing parameter

  void validate() const;
};

/// L = mean_i -alpha_{y_i} (1 - p_{y_i})^gamma log p_{y_i} with p from
/// softmax(logits). Gradients stay finite as p -> 1. Labels outside {0,1,2}
/// raise DataError.
torch::Tensor weighted_focal_loss(const torch::Tensor& logits,
                                  const torch::Tensor& labels,
                                  const FocalParams& params);

/// Per coordinate: 0.5 d^2/beta if |d| < beta else |d| - 0.5 beta; mean over
/// all coordinates.
torch::Tensor smooth_l1(const torch::Tensor& pred, const torch::Tensor& target,
                        double beta = 1.0);

}  // namespace discgrade
