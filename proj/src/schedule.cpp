#include "discgrade/schedule.hpp"

#include <cmath>
#include <sstream>

namespace discgrade {

double cosine_lr(double base_lr, int epoch_index, int total_epochs) {
  if (total_epochs < 1) throw ValidationError("cosine_lr: total_epochs must be >= 1");
  if (epoch_index < 0 || epoch_index >= total_epochs)
    throw ValidationError("cosine_lr: epoch index out of range");
  return base_lr * 0.5 *
         (1.0 + std::cos(M_PI * static_cast<double>(epoch_index) / total_epochs));
}

PlateauState plateau_step(PlateauState state, double metric, PlateauMode mode,
                          int patience, double factor, double min_delta) {
  if (!(factor > 0.0 && factor < 1.0))
    throw ValidationError("plateau_step: factor must be in (0,1)");
  if (!state.initialized) {
    state.initialized = true;
    state.best_metric = metric;
    state.bad_epochs = 0;
    return state;
  }
  const bool improved = mode == PlateauMode::Max
                            ? metric > state.best_metric + min_delta
                            : metric < state.best_metric - min_delta;
  if (improved) {
    state.best_metric = metric;
    state.bad_epochs = 0;
  } else {
    state.bad_epochs += 1;
    if (state.bad_epochs > patience) {
      state.lr *= factor;
      state.bad_epochs = 0;
    }
  }
  return state;
}

namespace {

std::string opt_to_cell(const std::optional<double>& v) {
  if (!v) return "";
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", *v);
  return buf;
}

std::optional<double> cell_to_opt(const std::string& s) {
  if (trim(s).empty()) return std::nullopt;
  return std::stod(s);
}

}  // namespace

void TrainHistory::save_csv(const fs::path& path) const {
  std::ostringstream csv;
  csv << "epoch,train_loss,val_loss,lr,val_balanced_accuracy,recall_normal,"
         "recall_moderate,recall_severe,val_rmse_px\n";
  for (const auto& e : epochs) {
    char head[160];
    std::snprintf(head, sizeof(head), "%d,%.17g,%.17g,%.17g", e.epoch,
                  e.train_loss, e.val_loss, e.lr);
    csv << head << ',' << opt_to_cell(e.val_balanced_accuracy) << ','
        << opt_to_cell(e.val_recall[0]) << ',' << opt_to_cell(e.val_recall[1])
        << ',' << opt_to_cell(e.val_recall[2]) << ','
        << opt_to_cell(e.val_rmse_px) << "\n";
  }
  write_text_file(path, csv.str());
}

TrainHistory TrainHistory::load_csv(const fs::path& path) {
  const std::string text = read_text_file(path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty history file: " + path.string());
  TrainHistory h;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto f = split_csv_line(line);
    if (f.size() != 9)
      throw DataError("history row must have 9 fields: " + path.string());
    EpochRecord e;
    e.epoch = std::stoi(f[0]);
    e.train_loss = std::stod(f[1]);
    e.val_loss = std::stod(f[2]);
    e.lr = std::stod(f[3]);
    e.val_balanced_accuracy = cell_to_opt(f[4]);
    e.val_recall = {cell_to_opt(f[5]), cell_to_opt(f[6]), cell_to_opt(f[7])};
    e.val_rmse_px = cell_to_opt(f[8]);
    h.epochs.push_back(e);
  }
  return h;
}

int select_best_checkpoint(const TrainHistory& history, BestCriterion criterion) {
  if (history.epochs.empty())
    throw DataError("select_best_checkpoint: empty history");
  int best_epoch = -1;
  double best_value = 0.0;
  for (const auto& e : history.epochs) {
    std::optional<double> value;
    bool maximize = false;
    switch (criterion) {
      case BestCriterion::ValBalancedAccuracyMax:
        value = e.val_balanced_accuracy;
        maximize = true;
        break;
      case BestCriterion::ValLossMin:
        value = e.val_loss;
        break;
      case BestCriterion::ValRmseMin:
        value = e.val_rmse_px;
        break;
    }
    if (!value) continue;
    const bool better =
        best_epoch < 0 || (maximize ? *value > best_value : *value < best_value);
    if (better) {  // strict comparison: ties keep the earlier epoch
      best_epoch = e.epoch;
      best_value = *value;
    }
  }
  if (best_epoch < 0)
    throw DataError("select_best_checkpoint: criterion metric absent from history");
  return best_epoch;
}

}  // namespace discgrade
