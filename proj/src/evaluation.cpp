#include "discgrade/evaluation.hpp"

#include <algorithm>
#include <map>

#include "discgrade/image_io.hpp"
#include "discgrade/losses.hpp"

namespace discgrade {

namespace {

constexpr std::uint64_t kStreamTorchProbe = 404;

std::vector<std::vector<int>> chunked(std::size_t n, int batch) {
  std::vector<std::vector<int>> out;
  for (std::size_t i = 0; i < n; i += batch) {
    std::vector<int> chunk;
    for (std::size_t j = i; j < std::min(n, i + static_cast<std::size_t>(batch));
         ++j) {
      chunk.push_back(static_cast<int>(j));
    }
    out.push_back(std::move(chunk));
  }
  return out;
}

std::vector<int> predict_dataset(ResNetEncoder& encoder, DiscHead& head,
                                 const ClassifierDataset& data, int batch_size) {
  torch::NoGradGuard no_grad;
  encoder->eval();
  head->eval();
  std::vector<int> preds;
  for (const auto& batch : chunked(data.size(), batch_size)) {
    auto logits = head->forward(encoder->forward(classifier_batch(data, batch)));
    for (int p : predicted_grades(logits)) preds.push_back(p);
  }
  return preds;
}

}  // namespace

ClassificationEval summarize_classification(const std::vector<int>& preds,
                                            const std::vector<int>& labels) {
  ClassificationEval out;
  out.cm = confusion_matrix(preds, labels);
  out.balanced_accuracy = balanced_accuracy(out.cm);
  out.overall_accuracy = overall_accuracy(out.cm);
  out.recalls = per_class_recall(out.cm);
  for (int g = 0; g < kNumGrades; ++g) {
    if (!out.recalls[g]) {
      out.warnings.push_back("recall undefined for grade " +
                             grade_to_string(static_cast<SeverityGrade>(g)) +
                             " (no discs); excluded from balanced accuracy");
    }
  }
  out.severe_to_normal = severe_to_normal_rate(out.cm);
  out.s2n_counts = severe_to_normal_counts(out.cm);
  if (!out.severe_to_normal) {
    out.warnings.push_back("severe-to-normal rate undefined (no severe discs)");
  }
  return out;
}

ClassificationEval evaluate_classifier_checkpoint(const fs::path& finetune_ckpt,
                                                  const RoiStore& store,
                                                  const SplitAssignment& split,
                                                  Partition partition,
                                                  const RunConfig& config) {
  const CheckpointMeta meta = read_checkpoint_meta(finetune_ckpt);
  if (meta.stage != "finetune")
    throw ValidationError("evaluate expects a finetune checkpoint, got stage '" +
                          meta.stage + "'");
  const ModelPreset preset = preset_from_string(meta.preset);

  ResNetEncoder encoder(preset, 1);
  DiscHead head;
  load_checkpoint(finetune_ckpt,
                  {{"encoder", encoder.ptr()}, {"head", head.ptr()}});

  const auto data = load_classifier_dataset(
      store, split, partition, config.preprocess, classifier_input_size(preset));
  if (data.size() == 0) throw ValidationError("evaluate: partition is empty");
  const auto preds = predict_dataset(encoder, head, data, config.batch_size);
  return summarize_classification(preds, data.labels);
}

// ---------------------------------------------------------------------------
// Linear probe
// ---------------------------------------------------------------------------

namespace {

torch::Tensor extract_features(ResNetEncoder& encoder,
                               const ClassifierDataset& data, int batch_size) {
  torch::NoGradGuard no_grad;
  encoder->eval();
  std::vector<torch::Tensor> chunks;
  for (const auto& batch : chunked(data.size(), batch_size)) {
    chunks.push_back(encoder->forward(classifier_batch(data, batch)));
  }
  return torch::cat(chunks, 0);
}

}  // namespace

ProbeResult linear_probe(const fs::path& pretrain_ckpt, const RoiStore& store,
                         const SplitAssignment& split, const ProbeConfig& config,
                         const PreprocessConfig& preprocess, int input_size) {
  const CheckpointMeta meta = read_checkpoint_meta(pretrain_ckpt);
  if (meta.stage != "pretrain")
    throw ValidationError("linear probe expects a pretrain checkpoint, got '" +
                          meta.stage + "'");
  const ModelPreset preset = preset_from_string(meta.preset);

  torch::manual_seed(derive_seed(config.seed, kStreamTorchProbe));

  ResNetEncoder encoder(preset, 1);
  load_checkpoint(pretrain_ckpt, {{"encoder", encoder.ptr()}});
  for (auto& p : encoder->parameters()) p.set_requires_grad(false);
  const auto before = snapshot_state(*encoder);

  const auto train = load_classifier_dataset(store, split, Partition::Train,
                                             preprocess, input_size);
  const auto val = load_classifier_dataset(store, split, Partition::Val,
                                           preprocess, input_size);
  if (train.size() == 0 || val.size() == 0)
    throw ValidationError("probe: train and val partitions must be non-empty");

  // The encoder is frozen and in eval mode, so its features are constants of
  // the probe: extract once, then train only the linear head on them.
  auto train_feats = extract_features(encoder, train, config.batch_size);
  auto val_feats = extract_features(encoder, val, config.batch_size);
  auto train_labels = torch::tensor(
      std::vector<std::int64_t>(train.labels.begin(), train.labels.end()),
      torch::kInt64);

  DiscHead head;
  torch::optim::AdamW optimizer(
      head->parameters(),
      torch::optim::AdamWOptions(config.lr).weight_decay(config.weight_decay));
  FocalParams focal{config.focal_alpha, config.focal_gamma};

  ProbeResult result;
  double best_metric = -1.0;
  std::vector<int> best_preds;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    head->train();
    std::vector<int> order(train.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    Rng rng(derive_seed(config.seed, 0x9200 + epoch));
    rng.shuffle(order);
    for (const auto& batch : chunked(order.size(), config.batch_size)) {
      std::vector<std::int64_t> sel(batch.size());
      for (std::size_t i = 0; i < batch.size(); ++i) sel[i] = order[batch[i]];
      auto idx = torch::tensor(sel, torch::kInt64);
      auto logits = head->forward(train_feats.index_select(0, idx));
      auto loss =
          weighted_focal_loss(logits, train_labels.index_select(0, idx), focal);
      optimizer.zero_grad();
      loss.backward();
      optimizer.step();
    }

    head->eval();
    torch::NoGradGuard no_grad;
    auto preds = predicted_grades(head->forward(val_feats));
    const double bal_acc = balanced_accuracy(confusion_matrix(preds, val.labels));
    if (bal_acc > best_metric) {
      best_metric = bal_acc;
      best_preds = preds;
      result.best_epoch = epoch + 1;
    }
  }

  result.metrics = summarize_classification(best_preds, val.labels);
  result.encoder_delta = max_abs_delta(before, snapshot_state(*encoder));
  return result;
}

// ---------------------------------------------------------------------------
// Regression evaluation
// ---------------------------------------------------------------------------

RegressionEval evaluate_regressor_checkpoint(const fs::path& roi_ckpt,
                                             const DatasetManifest& manifest,
                                             const fs::path& manifest_csv,
                                             const SplitAssignment& split,
                                             Partition partition,
                                             const RunConfig& config) {
  const CheckpointMeta meta = read_checkpoint_meta(roi_ckpt);
  if (meta.stage != "roi")
    throw ValidationError(
        "regression evaluation expects a roi checkpoint, got '" + meta.stage +
        "'");
  const ModelPreset preset = preset_from_string(meta.preset);

  RoiRegressor model(preset);
  load_checkpoint(roi_ckpt, {{"regressor", model.ptr()}});

  const auto data =
      load_regression_dataset(manifest, manifest_csv, split, partition,
                              config.preprocess, regressor_input_size(preset));
  if (data.size() == 0)
    throw ValidationError("regression evaluation: partition is empty");

  torch::NoGradGuard no_grad;
  model->eval();
  RegressionEval out;
  std::vector<std::pair<double, double>> preds, targets;
  for (const auto& batch : chunked(data.size(), config.batch_size)) {
    auto [x, levels, t] = regression_batch(data, batch);
    auto y = model->forward(x, levels).to(torch::kFloat64);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const auto& item = data.items.at(batch[i]);
      RegressionEval::Point point;
      point.key = item.key;
      point.slice_index = item.slice_index;
      point.gt_x = static_cast<double>(item.target_x) * item.src_width;
      point.gt_y = static_cast<double>(item.target_y) * item.src_height;
      point.pred_x = y[i][0].item<double>() * item.src_width;
      point.pred_y = y[i][1].item<double>() * item.src_height;
      out.points.push_back(point);
      preds.emplace_back(point.pred_x, point.pred_y);
      targets.emplace_back(point.gt_x, point.gt_y);
    }
  }
  out.rmse_px = coordinate_rmse(preds, targets);
  out.rmse_euclidean_px = coordinate_rmse_euclidean(preds, targets);
  out.n = static_cast<int>(preds.size());
  return out;
}

ClassificationEval evaluate_with_predicted_coords(
    const fs::path& finetune_ckpt, const RegressionEval& regression,
    const DatasetManifest& manifest, const fs::path& manifest_csv,
    const SplitAssignment& split, Partition partition, const RunConfig& config) {
  const CheckpointMeta meta = read_checkpoint_meta(finetune_ckpt);
  if (meta.stage != "finetune")
    throw ValidationError("evaluate expects a finetune checkpoint, got stage '" +
                          meta.stage + "'");
  const ModelPreset preset = preset_from_string(meta.preset);

  ResNetEncoder encoder(preset, 1);
  DiscHead head;
  load_checkpoint(finetune_ckpt,
                  {{"encoder", encoder.ptr()}, {"head", head.ptr()}});

  std::map<DiscKey, SeverityGrade> grade_of;
  for (auto& [key, grade] : discs_in_manifest(manifest)) grade_of[key] = grade;

  const fs::path image_root = resolved_image_root(manifest, manifest_csv);
  const auto& pp = config.preprocess;
  const int input = classifier_input_size(preset);

  // Re-crop at the predicted centers through the same chain as the export
  // path: normalize -> pad -> crop -> 8-bit -> float -> standardize.
  ClassifierDataset data;
  data.input_size = input;
  for (const auto& point : regression.points) {
    const Partition* part = split.find(point.key);
    if (!part || *part != partition) continue;
    const SliceImage slice =
        read_pgm16(slice_image_path(image_root, point.key, point.slice_index));
    ImageF padded =
        pad_constant(normalize_intensity(slice), pp.pad_width, pp.pad_value);
    RoiPatch patch =
        crop_roi(padded, static_cast<float>(point.pred_x) + pp.pad_width,
                 static_cast<float>(point.pred_y) + pp.pad_width, pp.roi_size,
                 point.key, point.slice_index);
    ImageF quantized = from_uint8(to_uint8(patch.pixels));
    data.patches.push_back(standardize_for_model(quantized, input,
                                                 pp.channel_mean, pp.channel_std));
    data.labels.push_back(static_cast<int>(grade_of.at(point.key)));
    data.keys.push_back(point.key);
  }
  if (data.size() == 0)
    throw ValidationError("predicted-coords evaluation: no discs in partition");

  const auto preds = predict_dataset(encoder, head, data, config.batch_size);
  return summarize_classification(preds, data.labels);
}

}  // namespace discgrade
