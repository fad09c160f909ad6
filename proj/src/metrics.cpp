#include "discgrade/metrics.hpp"

#include <cmath>

namespace discgrade {

int ConfusionMatrix3::total() const {
  int t = 0;
  for (const auto& row : counts) {
    for (int v : row) t += v;
  }
  return t;
}

int ConfusionMatrix3::row_sum(int true_grade) const {
  int t = 0;
  for (int v : counts[true_grade]) t += v;
  return t;
}

ConfusionMatrix3 confusion_matrix(const std::vector<int>& preds,
                                  const std::vector<int>& labels) {
  if (preds.size() != labels.size())
    throw DataError("confusion_matrix: length mismatch");
  if (preds.empty()) throw DataError("confusion_matrix: empty input");
  ConfusionMatrix3 cm;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= kNumGrades || preds[i] < 0 ||
        preds[i] >= kNumGrades) {
      throw DataError("confusion_matrix: grade outside {0,1,2} at index " +
                      std::to_string(i));
    }
    cm.counts[labels[i]][preds[i]] += 1;
  }
  return cm;
}

std::array<std::optional<double>, kNumGrades> per_class_recall(
    const ConfusionMatrix3& cm) {
  std::array<std::optional<double>, kNumGrades> out;
  for (int t = 0; t < kNumGrades; ++t) {
    const int rs = cm.row_sum(t);
    if (rs > 0) out[t] = static_cast<double>(cm.counts[t][t]) / rs;
  }
  return out;
}

double balanced_accuracy(const ConfusionMatrix3& cm) {
  const auto recalls = per_class_recall(cm);
  double sum = 0.0;
  int defined = 0;
  for (const auto& r : recalls) {
    if (r) {
      sum += *r;
      ++defined;
    }
  }
  if (defined == 0) throw DataError("balanced_accuracy: all rows empty");
  return sum / defined;
}

double overall_accuracy(const ConfusionMatrix3& cm) {
  const int total = cm.total();
  if (total == 0) throw DataError("overall_accuracy: empty matrix");
  int diag = 0;
  for (int i = 0; i < kNumGrades; ++i) diag += cm.counts[i][i];
  return static_cast<double>(diag) / total;
}

std::optional<double> severe_to_normal_rate(const ConfusionMatrix3& cm) {
  const int severe = static_cast<int>(SeverityGrade::Severe);
  const int normal = static_cast<int>(SeverityGrade::Normal);
  const int rs = cm.row_sum(severe);
  if (rs == 0) return std::nullopt;
  return static_cast<double>(cm.counts[severe][normal]) / rs;
}

SevereToNormal severe_to_normal_counts(const ConfusionMatrix3& cm) {
  const int severe = static_cast<int>(SeverityGrade::Severe);
  const int normal = static_cast<int>(SeverityGrade::Normal);
  return {cm.counts[severe][normal], cm.row_sum(severe)};
}

double coordinate_rmse(const std::vector<std::pair<double, double>>& preds_px,
                       const std::vector<std::pair<double, double>>& targets_px) {
  if (preds_px.size() != targets_px.size() || preds_px.empty())
    throw DataError("coordinate_rmse: inputs must be equal-length and non-empty");
  double acc = 0.0;
  for (std::size_t i = 0; i < preds_px.size(); ++i) {
    const double dx = preds_px[i].first - targets_px[i].first;
    const double dy = preds_px[i].second - targets_px[i].second;
    acc += (dx * dx + dy * dy) / 2.0;
  }
  return std::sqrt(acc / static_cast<double>(preds_px.size()));
}

double coordinate_rmse_euclidean(
    const std::vector<std::pair<double, double>>& preds_px,
    const std::vector<std::pair<double, double>>& targets_px) {
  if (preds_px.size() != targets_px.size() || preds_px.empty())
    throw DataError("coordinate_rmse: inputs must be equal-length and non-empty");
  double acc = 0.0;
  for (std::size_t i = 0; i < preds_px.size(); ++i) {
    const double dx = preds_px[i].first - targets_px[i].first;
    const double dy = preds_px[i].second - targets_px[i].second;
    acc += dx * dx + dy * dy;
  }
  return std::sqrt(acc / static_cast<double>(preds_px.size()));
}

int majority_grade(const std::vector<int>& labels) {
  if (labels.empty()) throw DataError("majority_grade: empty labels");
  std::array<int, kNumGrades> counts{};
  for (int l : labels) {
    if (l < 0 || l >= kNumGrades) throw DataError("majority_grade: bad label");
    counts[l] += 1;
  }
  int best = 0;
  for (int g = 1; g < kNumGrades; ++g) {
    if (counts[g] > counts[best]) best = g;
  }
  return best;
}

double majority_baseline_balanced_accuracy(const std::vector<int>& labels,
                                           int majority) {
  std::vector<int> preds(labels.size(), majority);
  return balanced_accuracy(confusion_matrix(preds, labels));
}

}  // namespace discgrade
