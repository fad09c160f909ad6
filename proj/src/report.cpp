#include "discgrade/report.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <sstream>

#include "discgrade/image_io.hpp"
#include "discgrade/manifest.hpp"
#include "discgrade/plot.hpp"
#include "discgrade/schedule.hpp"

namespace discgrade {

namespace {

constexpr std::array<std::uint8_t, 3> kBlue{52, 101, 204};
constexpr std::array<std::uint8_t, 3> kOrange{235, 140, 30};
constexpr std::array<std::uint8_t, 3> kGreen{40, 160, 70};
constexpr std::array<std::uint8_t, 3> kRed{210, 50, 50};
constexpr std::array<std::uint8_t, 3> kLightGreen{170, 220, 180};
constexpr std::array<std::uint8_t, 3> kLightOrange{245, 210, 170};
constexpr std::array<std::uint8_t, 3> kLightRed{240, 190, 190};

std::vector<double> epochs_of(const TrainHistory& h) {
  std::vector<double> e;
  for (const auto& r : h.epochs) e.push_back(r.epoch);
  return e;
}

void save_chart(const LineChartSpec& spec, const fs::path& path) {
  write_png_rgb8(path, render_line_chart(spec));
}

void render_pretrain(const TrainHistory& h, const fs::path& out) {
  std::vector<double> train, val, lr;
  for (const auto& r : h.epochs) {
    train.push_back(r.train_loss);
    val.push_back(r.val_loss);
    lr.push_back(r.lr);
  }
  const auto x = epochs_of(h);
  save_chart({"CONTRASTIVE LOSS",
              "EPOCH",
              "LOSS",
              860,
              520,
              {{"TRAIN", x, train, kBlue, 2}, {"VAL", x, val, kOrange, 2}}},
             out / "pretrain_loss.png");
  save_chart(
      {"COSINE LR SCHEDULE", "EPOCH", "LR", 860, 520, {{"LR", x, lr, kGreen, 2}}},
      out / "pretrain_lr.png");
}

void render_finetune(const TrainHistory& h, const fs::path& out) {
  const auto x = epochs_of(h);
  std::vector<double> bal, train, val;
  std::array<std::vector<double>, 3> recalls;
  std::array<std::vector<double>, 3> recall_x;
  for (const auto& r : h.epochs) {
    train.push_back(r.train_loss);
    val.push_back(r.val_loss);
    if (r.val_balanced_accuracy) bal.push_back(*r.val_balanced_accuracy);
    for (int g = 0; g < 3; ++g) {
      if (r.val_recall[g]) {
        recalls[g].push_back(*r.val_recall[g]);
        recall_x[g].push_back(r.epoch);
      }
    }
  }
  save_chart({"VALIDATION BALANCED ACCURACY",
              "EPOCH",
              "BAL ACC",
              860,
              520,
              {{"BAL ACC", x, bal, kBlue, 2}}},
             out / "finetune_balacc.png");
  save_chart({"FOCAL LOSS",
              "EPOCH",
              "LOSS",
              860,
              520,
              {{"TRAIN", x, train, kBlue, 2}, {"VAL", x, val, kOrange, 2}}},
             out / "finetune_loss.png");

  // Raw trajectories in light colors, EMA-smoothed overlays in bold.
  LineChartSpec spec{"PER-CLASS RECALL (EMA OVERLAY)", "EPOCH", "RECALL",
                     860,  520,
                     {}};
  const std::array<std::array<std::uint8_t, 3>, 3> light{kLightGreen, kLightOrange,
                                                         kLightRed};
  const std::array<std::array<std::uint8_t, 3>, 3> bold{kGreen, kOrange, kRed};
  static const char* names[3] = {"NORMAL", "MODERATE", "SEVERE"};
  for (int g = 0; g < 3; ++g) {
    spec.series.push_back({std::string(names[g]) + " RAW", recall_x[g],
                           recalls[g], light[g], 1});
  }
  for (int g = 0; g < 3; ++g) {
    spec.series.push_back({std::string(names[g]) + " EMA", recall_x[g],
                           ema_smooth(recalls[g], kRecallEmaFactor), bold[g], 2});
  }
  save_chart(spec, out / "finetune_recalls.png");
}

void render_roi(const TrainHistory& h, const fs::path& out) {
  const auto x = epochs_of(h);
  std::vector<double> rmse, train, val;
  for (const auto& r : h.epochs) {
    train.push_back(r.train_loss);
    val.push_back(r.val_loss);
    if (r.val_rmse_px) rmse.push_back(*r.val_rmse_px);
  }
  save_chart({"VALIDATION RMSE (PIXELS)",
              "EPOCH",
              "RMSE PX",
              860,
              520,
              {{"RMSE", x, rmse, kBlue, 2}}},
             out / "roi_rmse.png");
  save_chart({"SMOOTH L1 LOSS",
              "EPOCH",
              "LOSS",
              860,
              520,
              {{"TRAIN", x, train, kBlue, 2}, {"VAL", x, val, kOrange, 2}}},
             out / "roi_loss.png");
}

void render_confusion(const fs::path& metrics_json, const fs::path& out) {
  nlohmann::json j = nlohmann::json::parse(read_text_file(metrics_json));
  if (!j.contains("finetuned") || !j["finetuned"].contains("confusion")) return;
  ConfusionMatrix3 cm;
  const auto& rows = j["finetuned"]["confusion"];
  for (int t = 0; t < 3; ++t) {
    for (int p = 0; p < 3; ++p) cm.counts[t][p] = rows.at(t).at(p).get<int>();
  }
  write_png_rgb8(out / "confusion_heatmap.png",
                 render_confusion_heatmap(cm, "CONFUSION (VALIDATION DISCS)"));
}

void render_overlays(const fs::path& predictions_csv, const fs::path& manifest_csv,
                     const fs::path& out) {
  const DatasetManifest manifest = load_manifest(manifest_csv);
  const fs::path image_root = resolved_image_root(manifest, manifest_csv);

  struct Row {
    DiscKey key;
    int slice_index;
    double gt_x, gt_y, pred_x, pred_y;
  };
  std::vector<Row> rows;
  std::istringstream in(read_text_file(predictions_csv));
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto f = split_csv_line(line);
    if (f.size() != 8) throw DataError("bad roi_predictions row");
    rows.push_back({DiscKey{f[0], f[1], level_from_string(f[2])}, std::stoi(f[3]),
                    std::stod(f[4]), std::stod(f[5]), std::stod(f[6]),
                    std::stod(f[7])});
  }

  // One overlay per patient, first two patients in the file.
  std::map<std::string, std::vector<Row>> by_patient;
  std::vector<std::string> order;
  for (const auto& r : rows) {
    if (!by_patient.count(r.key.patient_id)) order.push_back(r.key.patient_id);
    by_patient[r.key.patient_id].push_back(r);
  }
  int emitted = 0;
  for (const auto& pid : order) {
    if (emitted >= 2) break;
    const auto& group = by_patient[pid];
    const SliceImage slice = read_pgm16(
        slice_image_path(image_root, group.front().key, group.front().slice_index));
    std::vector<std::pair<double, double>> gts, preds;
    for (const auto& r : group) {
      gts.emplace_back(r.gt_x, r.gt_y);
      preds.emplace_back(r.pred_x, r.pred_y);
    }
    write_png_rgb8(out / ("localization_" + pid + ".png"),
                   render_localization_overlay(slice, gts, preds, pid));
    ++emitted;
  }
}

}  // namespace

void emit_report(const fs::path& run_dir, const fs::path& out_dir) {
  bool any = false;
  fs::create_directories(out_dir);

  if (fs::exists(run_dir / "pretrain" / "history.csv")) {
    render_pretrain(TrainHistory::load_csv(run_dir / "pretrain" / "history.csv"),
                    out_dir);
    any = true;
  }
  if (fs::exists(run_dir / "finetune" / "history.csv")) {
    render_finetune(TrainHistory::load_csv(run_dir / "finetune" / "history.csv"),
                    out_dir);
    any = true;
  }
  if (fs::exists(run_dir / "roi" / "history.csv")) {
    render_roi(TrainHistory::load_csv(run_dir / "roi" / "history.csv"), out_dir);
    any = true;
  }
  if (fs::exists(run_dir / "evaluate" / "metrics.json")) {
    render_confusion(run_dir / "evaluate" / "metrics.json", out_dir);
    any = true;
  }
  if (fs::exists(run_dir / "evaluate" / "roi_predictions.csv") &&
      fs::exists(run_dir / "phantom" / "manifest.csv")) {
    render_overlays(run_dir / "evaluate" / "roi_predictions.csv",
                    run_dir / "phantom" / "manifest.csv", out_dir);
  }

  if (!any) {
    throw ValidationError("report: no completed stage found under " +
                          run_dir.string());
  }
}

}  // namespace discgrade
