#pragma once

#include <optional>

#include "discgrade/run_config.hpp"

namespace discgrade {

// Learning-rate schedules as pure, closed-form / state-machine functions, and
// the per-epoch history they produce.

/// Cosine annealing from base toward 0: lr(e) = base * 0.5 * (1 + cos(pi*e/E))
/// for 0-based epoch e of E total epochs.
double cosine_lr(double base_lr, int epoch_index, int total_epochs);

enum class PlateauMode { Max, Min };

struct PlateauState {
  double lr = 0.0;
  double best_metric = 0.0;
  int bad_epochs = 0;
  bool initialized = false;
};

/// Pure state transition mirroring epoch-wise plateau reduction: the first
/// observation initializes best; an improvement (strict, beyond min_delta)
/// resets the counter; once the counter exceeds patience the lr is scaled by
/// factor and the counter resets. With a constant metric and patience p the
/// first reduction lands on the (p+1)-th non-improving epoch.
PlateauState plateau_step(PlateauState state, double metric, PlateauMode mode,
                          int patience, double factor, double min_delta = 1e-4);

// ---------------------------------------------------------------------------
// Per-epoch training history (one record per completed epoch).
// ---------------------------------------------------------------------------

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double lr = 0.0;
  std::optional<double> val_balanced_accuracy;      // finetune
  std::array<std::optional<double>, 3> val_recall;  // finetune
  std::optional<double> val_rmse_px;                // roi
};

struct TrainHistory {
  Stage stage = Stage::Pretrain;
  std::vector<EpochRecord> epochs;

  void save_csv(const fs::path& path) const;
  static TrainHistory load_csv(const fs::path& path);
};

enum class BestCriterion { ValBalancedAccuracyMax, ValLossMin, ValRmseMin };

/// 1-based epoch of the best record; ties break toward the earlier epoch.
/// Records lacking the criterion's metric are skipped.
int select_best_checkpoint(const TrainHistory& history, BestCriterion criterion);

}  // namespace discgrade
