#pragma once

#include <optional>

#include "discgrade/types.hpp"

namespace discgrade {

// Confusion analysis and the safety-oriented severe-to-normal rate.

struct ConfusionMatrix3 {
  // rows = true grade, cols = predicted grade
  std::array<std::array<int, kNumGrades>, kNumGrades> counts{};

  int total() const;
  int row_sum(int true_grade) const;
  bool operator==(const ConfusionMatrix3&) const = default;
};

ConfusionMatrix3 confusion_matrix(const std::vector<int>& preds,
                                  const std::vector<int>& labels);

/// recall_t = counts[t][t] / row_sum(t); empty rows yield nullopt (excluded
/// from balanced accuracy, surfaced as a warning by callers).
std::array<std::optional<double>, kNumGrades> per_class_recall(
    const ConfusionMatrix3& cm);

/// Mean of the defined per-class recalls.
double balanced_accuracy(const ConfusionMatrix3& cm);

double overall_accuracy(const ConfusionMatrix3& cm);

/// counts[Severe][Normal] / row_sum(Severe); nullopt when no severe discs.
std::optional<double> severe_to_normal_rate(const ConfusionMatrix3& cm);

struct SevereToNormal {
  int numerator = 0;
  int denominator = 0;
};

/// The explicit fraction behind severe_to_normal_rate.
SevereToNormal severe_to_normal_counts(const ConfusionMatrix3& cm);

/// sqrt(mean over points of ((dx)^2 + (dy)^2) / 2): per-coordinate averaging.
double coordinate_rmse(const std::vector<std::pair<double, double>>& preds_px,
                       const std::vector<std::pair<double, double>>& targets_px);

/// Secondary report number: sqrt(mean of squared Euclidean point distances).
double coordinate_rmse_euclidean(
    const std::vector<std::pair<double, double>>& preds_px,
    const std::vector<std::pair<double, double>>& targets_px);

/// Balanced accuracy of always predicting `majority_grade`.
double majority_baseline_balanced_accuracy(const std::vector<int>& labels,
                                           int majority_grade);

/// Most frequent grade (ties toward the lower grade).
int majority_grade(const std::vector<int>& labels);

}  // namespace discgrade
