#include "discgrade/losses.hpp"

#include "discgrade/common.hpp"

namespace discgrade {

namespace {

torch::Tensor l2_normalize_rows(const torch::Tensor& z) {
  auto norms = z.norm(2, /*dim=*/1, /*keepdim=*/true);
  if ((norms.min().item<double>()) <= 0.0) {
    throw NumericError("zero-norm embedding row; refusing to normalize");
  }
  return z / norms;
}

}  // namespace

torch::Tensor cosine_similarity_matrix(const torch::Tensor& z) {
  if (z.dim() != 2) throw DataError("cosine_similarity_matrix: expected N x D");
  auto zn = l2_normalize_rows(z);
  return torch::mm(zn, zn.t());
}

torch::Tensor multi_positive_ntxent(const EmbeddingBatch& batch) {
  const auto& z = batch.z;
  if (z.dim() != 2 || z.size(0) < 2)
    throw DataError("multi_positive_ntxent: need an N x D batch with N >= 2");
  const auto n = z.size(0);
  if (static_cast<std::int64_t>(batch.group_ids.size()) != n)
    throw DataError("multi_positive_ntxent: group_ids length mismatch");
  if (!(batch.tau > 0.0)) throw DataError("multi_positive_ntxent: tau must be > 0");

  auto groups = torch::tensor(batch.group_ids, torch::kInt64);
  auto same_group = groups.unsqueeze(0).eq(groups.unsqueeze(1));
  auto eye = torch::eye(n, torch::kBool);
  auto pos_mask = same_group & ~eye;

  auto pos_count = pos_mask.sum(1);
  auto anchor_mask = pos_count > 0;
  if (!anchor_mask.any().item<bool>()) {
    throw NumericError(
        "multi_positive_ntxent: every group is a singleton; loss undefined");
  }

  auto logits = cosine_similarity_matrix(z) / batch.tau;
  // Denominator over all k != i, evaluated as a log-sum-exp.
  auto masked = logits.masked_fill(eye, -std::numeric_limits<double>::infinity());
  auto lse = torch::logsumexp(masked, /*dim=*/1);

  auto log_ratio = logits - lse.unsqueeze(1);  // log of Eq.'s softmax ratio
  auto pos_sum = (log_ratio * pos_mask.to(z.dtype())).sum(1);
  auto counts = pos_count.to(z.dtype()).clamp_min(1);
  auto per_anchor = -pos_sum / counts;

  return per_anchor.masked_select(anchor_mask).mean();
}

void FocalParams::validate() const {
  for (double a : alpha) {
    if (!(a > 0.0)) throw ValidationError("focal loss: alpha must be strictly positive");
  }
  if (gamma < 0.0) throw ValidationError("focal loss: gamma must be >= 0");
}

torch::Tensor weighted_focal_loss(const torch::Tensor& logits,
                                  const torch::Tensor& labels,
                                  const FocalParams& params) {
  params.validate();
  if (logits.dim() != 2 || logits.size(1) != 3)
    throw DataError("weighted_focal_loss: expected N x 3 logits");
  if (labels.dim() != 1 || labels.size(0) != logits.size(0))
    throw DataError("weighted_focal_loss: labels must be N");
  auto lab = labels.to(torch::kInt64);
  if (lab.numel() == 0) throw DataError("weighted_focal_loss: empty batch");
  if (lab.min().item<std::int64_t>() < 0 || lab.max().item<std::int64_t>() > 2)
    throw DataError("weighted_focal_loss: label outside {0,1,2}");

  auto log_probs = torch::log_softmax(logits, /*dim=*/1);
  auto log_py = log_probs.gather(1, lab.unsqueeze(1)).squeeze(1);
  // 1 - p computed as -expm1(log p): exact near p = 1, so the modulating
  // factor vanishes cleanly for saturated predictions.
  auto one_minus_p = (-torch::expm1(log_py)).clamp_min(0.0);
  auto alpha = torch::tensor({params.alpha[0], params.alpha[1], params.alpha[2]},
                             logits.options())
                   .index_select(0, lab);
  auto focal = alpha * torch::pow(one_minus_p, params.gamma) * (-log_py);
  return focal.mean();
}

torch::Tensor smooth_l1(const torch::Tensor& pred, const torch::Tensor& target,
                        double beta) {
  if (pred.sizes() != target.sizes())
    throw DataError("smooth_l1: shape mismatch");
  if (beta < 0.0) throw DataError("smooth_l1: beta must be >= 0");
  auto diff = (pred - target).abs();
  if (beta == 0.0) return diff.mean();
  auto quadratic = 0.5 * diff * diff / beta;
  auto linear = diff - 0.5 * beta;
  return torch::where(diff < beta, quadratic, linear).mean();
}

}  // namespace discgrade
