#include "discgrade/training.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "discgrade/image_io.hpp"
#include "discgrade/losses.hpp"
#include "discgrade/metrics.hpp"

namespace discgrade {

namespace {

// Stream ids for derived seeds, one per consumer.
constexpr std::uint64_t kStreamTorchPretrain = 101;
constexpr std::uint64_t kStreamTorchFinetune = 202;
constexpr std::uint64_t kStreamTorchRoi = 303;
constexpr std::uint64_t kStreamShuffle = 0x5100;
constexpr std::uint64_t kStreamTrainViews = 0x7200;
constexpr std::uint64_t kStreamValViews = 0x7300;

std::vector<int> partition_indices(std::size_t n) {
  std::vector<int> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<int>(i);
  return idx;
}

std::vector<std::vector<int>> chunked(const std::vector<int>& indices, int batch) {
  std::vector<std::vector<int>> out;
  for (std::size_t i = 0; i < indices.size(); i += batch) {
    out.emplace_back(indices.begin() + i,
                     indices.begin() + std::min(indices.size(),
                                                i + static_cast<std::size_t>(batch)));
  }
  return out;
}

torch::Tensor images_to_tensor(const std::vector<const ImageF*>& images) {
  const int n = static_cast<int>(images.size());
  const int h = images.front()->height;
  const int w = images.front()->width;
  auto t = torch::empty({n, 1, h, w}, torch::kFloat32);
  float* dst = t.data_ptr<float>();
  for (int i = 0; i < n; ++i) {
    std::copy(images[i]->data.begin(), images[i]->data.end(),
              dst + static_cast<std::size_t>(i) * h * w);
  }
  return t;
}

std::unique_ptr<torch::optim::Optimizer> make_optimizer(
    const RunConfig& config,
    std::vector<std::pair<std::vector<torch::Tensor>, double>> groups) {
  std::vector<torch::optim::OptimizerParamGroup> pgs;
  if (config.optimizer == OptimizerKind::AdamW) {
    for (auto& [params, lr] : groups) {
      auto opts = std::make_unique<torch::optim::AdamWOptions>(lr);
      opts->weight_decay(config.weight_decay);
      pgs.emplace_back(params, std::move(opts));
    }
    return std::make_unique<torch::optim::AdamW>(
        pgs,
        torch::optim::AdamWOptions(config.lr).weight_decay(config.weight_decay));
  }
  for (auto& [params, lr] : groups) {
    auto opts = std::make_unique<torch::optim::SGDOptions>(lr);
    opts->momentum(config.momentum).weight_decay(config.weight_decay);
    pgs.emplace_back(params, std::move(opts));
  }
  return std::make_unique<torch::optim::SGD>(
      pgs, torch::optim::SGDOptions(config.lr)
               .momentum(config.momentum)
               .weight_decay(config.weight_decay));
}

void set_group_lr(torch::optim::Optimizer& opt, std::size_t group, double lr) {
  auto& options = opt.param_groups().at(group).options();
  if (auto* adamw = dynamic_cast<torch::optim::AdamWOptions*>(&options)) {
    adamw->lr(lr);
  } else if (auto* sgd = dynamic_cast<torch::optim::SGDOptions*>(&options)) {
    sgd->lr(lr);
  } else {
    throw DataError("unsupported optimizer options type");
  }
}

double finite_loss(const torch::Tensor& loss, const char* stage) {
  const double v = loss.item<double>();
  if (!std::isfinite(v)) throw NumericError(std::string(stage) + ": non-finite loss");
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// Datasets
// ---------------------------------------------------------------------------

ClassifierDataset load_classifier_dataset(const RoiStore& store,
                                          const SplitAssignment& split,
                                          Partition partition,
                                          const PreprocessConfig& preprocess,
                                          int input_size) {
  ClassifierDataset data;
  data.input_size = input_size;
  for (const auto& rec : representative_rois(store)) {
    const Partition* p = split.find(rec.key);
    if (!p || *p != partition) continue;
    ImageF patch = load_roi_patch(store, rec);
    data.patches.push_back(standardize_for_model(
        patch, input_size, preprocess.channel_mean, preprocess.channel_std));
    data.labels.push_back(static_cast<int>(rec.grade));
    data.keys.push_back(rec.key);
  }
  return data;
}

torch::Tensor classifier_batch(const ClassifierDataset& data,
                               const std::vector<int>& indices) {
  std::vector<const ImageF*> imgs;
  imgs.reserve(indices.size());
  for (int i : indices) imgs.push_back(&data.patches.at(i));
  return images_to_tensor(imgs);
}

RegressionDataset load_regression_dataset(const DatasetManifest& manifest,
                                          const fs::path& manifest_csv,
                                          const SplitAssignment& split,
                                          Partition partition,
                                          const PreprocessConfig& preprocess,
                                          int input_size) {
  const fs::path image_root = resolved_image_root(manifest, manifest_csv);
  RegressionDataset data;
  data.input_size = input_size;

  std::map<std::pair<std::string, std::string>, int> series_index;
  for (const auto& a : representative_annotations(manifest)) {
    const Partition* p = split.find(a.key);
    if (!p || *p != partition) continue;

    const auto series_key = std::make_pair(a.key.patient_id, a.key.series_id);
    auto it = series_index.find(series_key);
    if (it == series_index.end()) {
      std::vector<ImageF> slices;
      for (int si = 0;; ++si) {
        const fs::path path = slice_image_path(image_root, a.key, si);
        if (!fs::exists(path)) break;
        slices.push_back(standardize_for_model(
            normalize_intensity(read_pgm16(path)), input_size,
            preprocess.channel_mean, preprocess.channel_std));
      }
      if (slices.empty()) {
        throw DataError("no slices found for series " + a.key.patient_id + "/" +
                        a.key.series_id);
      }
      it = series_index
               .emplace(series_key, static_cast<int>(data.series_slices.size()))
               .first;
      data.series_slices.push_back(std::move(slices));
    }

    const auto& series = data.series_slices[it->second];
    if (a.slice_index >= static_cast<int>(series.size())) {
      throw DataError("annotation slice_index beyond series length for " +
                      a.key.str());
    }
    const fs::path mid_path = slice_image_path(image_root, a.key, a.slice_index);
    const auto [h, w] = read_pgm16_dims(mid_path);

    RegressionDataset::Item item;
    item.series = it->second;
    item.slice_index = a.slice_index;
    item.level = level_index(a.key.level);
    item.src_width = static_cast<float>(w);
    item.src_height = static_cast<float>(h);
    item.target_x = a.x / item.src_width;
    item.target_y = a.y / item.src_height;
    item.key = a.key;
    data.items.push_back(std::move(item));
  }
  return data;
}

std::tuple<torch::Tensor, torch::Tensor, torch::Tensor> regression_batch(
    const RegressionDataset& data, const std::vector<int>& indices) {
  const int n = static_cast<int>(indices.size());
  const int s = data.input_size;
  auto x = torch::empty({n, 3, s, s}, torch::kFloat32);
  auto levels = torch::empty({n}, torch::kInt64);
  auto targets = torch::empty({n, 2}, torch::kFloat32);
  float* xd = x.data_ptr<float>();
  for (int i = 0; i < n; ++i) {
    const auto& item = data.items.at(indices[i]);
    const auto stack =
        stack_2p5d(data.series_slices.at(item.series), item.slice_index);
    for (int c = 0; c < 3; ++c) {
      std::copy(stack[c].data.begin(), stack[c].data.end(),
                xd + (static_cast<std::size_t>(i) * 3 + c) * s * s);
    }
    levels[i] = item.level;
    targets[i][0] = item.target_x;
    targets[i][1] = item.target_y;
  }
  return {x, levels, targets};
}

// ---------------------------------------------------------------------------
// Gradient clipping
// ---------------------------------------------------------------------------

double clip_gradient_norm(const std::vector<torch::Tensor>& parameters,
                          double max_norm) {
  if (!(max_norm > 0.0)) throw ValidationError("clip: max_norm must be > 0");
  double sq_sum = 0.0;
  std::vector<torch::Tensor> grads;
  for (const auto& p : parameters) {
    if (!p.grad().defined()) continue;
    grads.push_back(p.grad());
    sq_sum += p.grad().to(torch::kFloat64).pow(2).sum().item<double>();
  }
  const double norm = std::sqrt(sq_sum);
  if (std::isinf(max_norm) || norm <= max_norm) return 1.0;
  const double factor = max_norm / norm;
  {
    torch::NoGradGuard no_grad;
    for (auto& g : grads) g.mul_(factor);
  }
  return factor;
}

// ---------------------------------------------------------------------------
// Contrastive pretraining
// ---------------------------------------------------------------------------

namespace {

// Deterministic per-(epoch, disc) view generation, independent of batch
// composition and iteration order.
torch::Tensor build_view_batch(const ClassifierDataset& data,
                               const std::vector<int>& disc_indices,
                               const RunConfig& config, std::uint64_t stream,
                               int epoch, std::vector<std::int64_t>& group_ids) {
  std::vector<ImageF> views;
  views.reserve(disc_indices.size() * config.num_views);
  group_ids.clear();
  for (int idx : disc_indices) {
    Rng rng(derive_seed(derive_seed(config.seed, stream + epoch), idx));
    auto group = make_contrastive_views(data.patches.at(idx), config.num_views,
                                        config.augment, rng, data.keys.at(idx));
    for (auto& v : group.views) {
      views.push_back(std::move(v));
      group_ids.push_back(idx);
    }
  }
  std::vector<const ImageF*> ptrs;
  ptrs.reserve(views.size());
  for (const auto& v : views) ptrs.push_back(&v);
  return images_to_tensor(ptrs);
}

double contrastive_epoch_loss(ResNetEncoder& encoder, ProjectionHead& proj,
                              const ClassifierDataset& data,
                              const RunConfig& config, int epoch,
                              std::uint64_t stream) {
  torch::NoGradGuard no_grad;
  encoder->eval();
  proj->eval();
  double total = 0.0;
  std::size_t discs = 0;
  for (const auto& batch :
       chunked(partition_indices(data.size()), config.batch_size)) {
    std::vector<std::int64_t> gids;
    auto x = build_view_batch(data, batch, config, stream, epoch, gids);
    auto z = project(proj, encoder->forward(x));
    auto loss = multi_positive_ntxent({z, gids, config.tau});
    total += loss.item<double>() * static_cast<double>(batch.size());
    discs += batch.size();
  }
  return total / static_cast<double>(discs);
}

}  // namespace

StageResult pretrain_contrastive(const RunConfig& config, const RoiStore& store,
                                 const SplitAssignment& split,
                                 const fs::path& out_dir) {
  if (config.stage != Stage::Pretrain)
    throw ValidationError("pretrain_contrastive: config stage mismatch");
  config.validate();
  fs::create_directories(out_dir);
  torch::manual_seed(derive_seed(config.seed, kStreamTorchPretrain));

  const int input = config.preprocess.model_input_size;
  const auto train = load_classifier_dataset(store, split, Partition::Train,
                                             config.preprocess, input);
  const auto val = load_classifier_dataset(store, split, Partition::Val,
                                           config.preprocess, input);
  if (train.size() == 0)
    throw ValidationError("pretrain: train partition is empty");

  ResNetEncoder encoder(config.preset, 1);
  ProjectionHead proj;
  auto all_params = encoder->parameters();
  for (auto& p : proj->parameters()) all_params.push_back(p);
  auto optimizer = make_optimizer(config, {{all_params, config.lr}});

  StageResult result;
  result.history.stage = Stage::Pretrain;
  result.best_checkpoint = out_dir / "pretrain_best.pt";
  result.last_checkpoint = out_dir / "pretrain_last.pt";
  double best_val = std::numeric_limits<double>::infinity();

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = cosine_lr(config.lr, epoch, config.epochs);
    set_group_lr(*optimizer, 0, lr);

    encoder->train();
    proj->train();
    auto order = partition_indices(train.size());
    Rng shuffle_rng(derive_seed(config.seed, kStreamShuffle + epoch));
    shuffle_rng.shuffle(order);

    double train_loss = 0.0;
    std::size_t seen = 0;
    for (const auto& batch : chunked(order, config.batch_size)) {
      std::vector<std::int64_t> gids;
      auto x = build_view_batch(train, batch, config, kStreamTrainViews, epoch,
                                gids);
      auto z = project(proj, encoder->forward(x));
      auto loss = multi_positive_ntxent({z, gids, config.tau});
      optimizer->zero_grad();
      loss.backward();
      if (config.clip_max_norm > 0.0)
        clip_gradient_norm(all_params, config.clip_max_norm);
      optimizer->step();
      train_loss += finite_loss(loss, "pretrain") * batch.size();
      seen += batch.size();
    }
    train_loss /= static_cast<double>(seen);

    const double val_loss =
        val.size() > 0 ? contrastive_epoch_loss(encoder, proj, val, config,
                                                epoch, kStreamValViews)
                       : train_loss;

    EpochRecord rec;
    rec.epoch = epoch + 1;
    rec.train_loss = train_loss;
    rec.val_loss = val_loss;
    rec.lr = lr;
    result.history.epochs.push_back(rec);

    if (val_loss < best_val) {
      best_val = val_loss;
      result.best_epoch = epoch + 1;
      save_checkpoint(result.best_checkpoint,
                      {1, "pretrain", preset_to_string(config.preset), epoch + 1,
                       config.hash(), {{"val_loss", val_loss}}},
                      {{"encoder", encoder.ptr()}, {"projection", proj.ptr()}});
    }
  }

  save_checkpoint(result.last_checkpoint,
                  {1, "pretrain", preset_to_string(config.preset), config.epochs,
                   config.hash(),
                   {{"val_loss", result.history.epochs.back().val_loss}}},
                  {{"encoder", encoder.ptr()}, {"projection", proj.ptr()}});
  result.history.save_csv(out_dir / "history.csv");
  return result;
}

// ---------------------------------------------------------------------------
// Supervised fine-tuning
// ---------------------------------------------------------------------------

namespace {

struct EvalOutput {
  double loss = 0.0;
  ConfusionMatrix3 cm;
};

EvalOutput evaluate_epoch(ResNetEncoder& encoder, DiscHead& head,
                          const ClassifierDataset& data, const RunConfig& config) {
  torch::NoGradGuard no_grad;
  encoder->eval();
  head->eval();
  FocalParams params{config.focal_alpha, config.focal_gamma};
  std::vector<int> preds;
  double loss_sum = 0.0;
  for (const auto& batch :
       chunked(partition_indices(data.size()), config.batch_size)) {
    auto x = classifier_batch(data, batch);
    std::vector<std::int64_t> labels64;
    for (int i : batch) labels64.push_back(data.labels.at(i));
    auto labels = torch::tensor(labels64, torch::kInt64);
    auto logits = head->forward(encoder->forward(x));
    loss_sum += weighted_focal_loss(logits, labels, params).item<double>() *
                static_cast<double>(batch.size());
    for (int p : predicted_grades(logits)) preds.push_back(p);
  }
  EvalOutput out;
  out.loss = loss_sum / static_cast<double>(data.size());
  out.cm = confusion_matrix(preds, data.labels);
  return out;
}

}  // namespace

StageResult finetune_classifier(const RunConfig& config, const RoiStore& store,
                                const SplitAssignment& split,
                                const fs::path& pretrain_ckpt,
                                const fs::path& out_dir) {
  if (config.stage != Stage::Finetune)
    throw ValidationError("finetune_classifier: config stage mismatch");
  config.validate();
  if (config.augment.enabled)
    throw ValidationError("finetune path must run with augmentation disabled");

  const CheckpointMeta meta = read_checkpoint_meta(pretrain_ckpt);
  if (meta.stage != "pretrain")
    throw ValidationError("finetune expects a pretrain checkpoint, got stage '" +
                          meta.stage + "'");
  if (meta.preset != preset_to_string(config.preset))
    throw ValidationError("checkpoint preset '" + meta.preset +
                          "' does not match configured preset '" +
                          preset_to_string(config.preset) + "'");

  fs::create_directories(out_dir);
  torch::manual_seed(derive_seed(config.seed, kStreamTorchFinetune));

  const int input = config.preprocess.model_input_size;
  const auto train = load_classifier_dataset(store, split, Partition::Train,
                                             config.preprocess, input);
  const auto val = load_classifier_dataset(store, split, Partition::Val,
                                           config.preprocess, input);
  if (train.size() == 0 || val.size() == 0)
    throw ValidationError("finetune: train and val partitions must be non-empty");

  ResNetEncoder encoder(config.preset, 1);
  DiscHead head;
  load_checkpoint(pretrain_ckpt, {{"encoder", encoder.ptr()}});

  const std::vector<std::string> frozen = {"stem", "layer1", "layer2", "layer3"};
  auto groups = build_finetune_param_groups(encoder, head, frozen,
                                            config.backbone_lr, config.lr);
  auto optimizer = make_optimizer(
      config,
      {{groups.backbone, groups.backbone_lr}, {groups.head, groups.head_lr}});
  std::vector<torch::Tensor> trainable = groups.backbone;
  for (auto& p : groups.head) trainable.push_back(p);

  const double lr_ratio = config.backbone_lr / config.lr;
  PlateauState plateau;
  plateau.lr = config.lr;
  FocalParams focal{config.focal_alpha, config.focal_gamma};

  StageResult result;
  result.history.stage = Stage::Finetune;
  result.best_checkpoint = out_dir / "finetune_best.pt";
  result.last_checkpoint = out_dir / "finetune_last.pt";
  double best_metric = -1.0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double head_lr = plateau.lr;
    set_group_lr(*optimizer, 0, head_lr * lr_ratio);
    set_group_lr(*optimizer, 1, head_lr);

    encoder->train_with_frozen_stages(frozen);
    head->train();
    auto order = partition_indices(train.size());
    Rng shuffle_rng(derive_seed(config.seed, kStreamShuffle + epoch));
    shuffle_rng.shuffle(order);

    double train_loss = 0.0;
    std::size_t seen = 0;
    for (const auto& batch : chunked(order, config.batch_size)) {
      auto x = classifier_batch(train, batch);
      std::vector<std::int64_t> labels64;
      for (int i : batch) labels64.push_back(train.labels.at(i));
      auto labels = torch::tensor(labels64, torch::kInt64);
      // Single representative ROI per disc: the pooled disc representation
      // is the encoder output itself (S = 1).
      auto logits = head->forward(encoder->forward(x));
      auto loss = weighted_focal_loss(logits, labels, focal);
      optimizer->zero_grad();
      loss.backward();
      if (config.clip_max_norm > 0.0)
        clip_gradient_norm(trainable, config.clip_max_norm);
      optimizer->step();
      train_loss += finite_loss(loss, "finetune") * batch.size();
      seen += batch.size();
    }
    train_loss /= static_cast<double>(seen);

    const EvalOutput ev = evaluate_epoch(encoder, head, val, config);
    const double bal_acc = balanced_accuracy(ev.cm);
    const auto recalls = per_class_recall(ev.cm);

    EpochRecord rec;
    rec.epoch = epoch + 1;
    rec.train_loss = train_loss;
    rec.val_loss = ev.loss;
    rec.lr = head_lr;
    rec.val_balanced_accuracy = bal_acc;
    rec.val_recall = recalls;
    result.history.epochs.push_back(rec);

    if (bal_acc > best_metric) {
      best_metric = bal_acc;
      result.best_epoch = epoch + 1;
      save_checkpoint(result.best_checkpoint,
                      {1, "finetune", preset_to_string(config.preset), epoch + 1,
                       config.hash(), {{"val_balanced_accuracy", bal_acc}}},
                      {{"encoder", encoder.ptr()}, {"head", head.ptr()}});
    }
    plateau = plateau_step(plateau, bal_acc, PlateauMode::Max,
                           config.plateau_patience, config.plateau_factor,
                           config.plateau_min_delta);
  }

  save_checkpoint(
      result.last_checkpoint,
      {1, "finetune", preset_to_string(config.preset), config.epochs,
       config.hash(),
       {{"val_balanced_accuracy",
         result.history.epochs.back().val_balanced_accuracy.value()}}},
      {{"encoder", encoder.ptr()}, {"head", head.ptr()}});
  result.history.save_csv(out_dir / "history.csv");
  return result;
}

// ---------------------------------------------------------------------------
// ROI regression
// ---------------------------------------------------------------------------

namespace {

double regression_rmse(RoiRegressor& model, const RegressionDataset& data,
                       int batch_size) {
  torch::NoGradGuard no_grad;
  model->eval();
  std::vector<std::pair<double, double>> preds, targets;
  for (const auto& batch : chunked(partition_indices(data.size()), batch_size)) {
    auto [x, levels, t] = regression_batch(data, batch);
    auto y = model->forward(x, levels).to(torch::kFloat64);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const auto& item = data.items.at(batch[i]);
      preds.emplace_back(y[i][0].item<double>() * item.src_width,
                         y[i][1].item<double>() * item.src_height);
      targets.emplace_back(static_cast<double>(item.target_x) * item.src_width,
                           static_cast<double>(item.target_y) * item.src_height);
    }
  }
  return coordinate_rmse(preds, targets);
}

}  // namespace

StageResult train_roi_regressor(const RunConfig& config,
                                const DatasetManifest& manifest,
                                const fs::path& manifest_csv,
                                const SplitAssignment& split,
                                const fs::path& out_dir) {
  if (config.stage != Stage::Roi)
    throw ValidationError("train_roi_regressor: config stage mismatch");
  config.validate();
  fs::create_directories(out_dir);
  torch::manual_seed(derive_seed(config.seed, kStreamTorchRoi));

  const int input = config.preprocess.regression_input_size;
  const auto train = load_regression_dataset(
      manifest, manifest_csv, split, Partition::Train, config.preprocess, input);
  const auto val = load_regression_dataset(
      manifest, manifest_csv, split, Partition::Val, config.preprocess, input);
  if (train.size() == 0 || val.size() == 0)
    throw ValidationError("roi: train and val partitions must be non-empty");

  RoiRegressor model(config.preset);
  if (!config.roi_init_weights.empty()) {
    if (!fs::exists(config.roi_init_weights))
      throw ValidationError("roi_init_weights not found: " +
                            config.roi_init_weights);
    load_checkpoint(config.roi_init_weights,
                    {{"backbone", model->backbone.ptr()}});
  }
  auto params = model->parameters();
  auto optimizer = make_optimizer(config, {{params, config.lr}});

  PlateauState plateau;
  plateau.lr = config.lr;

  StageResult result;
  result.history.stage = Stage::Roi;
  result.best_checkpoint = out_dir / "roi_best.pt";
  result.last_checkpoint = out_dir / "roi_last.pt";
  double best_rmse = std::numeric_limits<double>::infinity();

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    set_group_lr(*optimizer, 0, plateau.lr);

    model->train();
    auto order = partition_indices(train.size());
    Rng shuffle_rng(derive_seed(config.seed, kStreamShuffle + epoch));
    shuffle_rng.shuffle(order);

    double train_loss = 0.0;
    std::size_t seen = 0;
    for (const auto& batch : chunked(order, config.batch_size)) {
      auto [x, levels, targets] = regression_batch(train, batch);
      auto pred = model->forward(x, levels);
      auto loss = smooth_l1(pred, targets, config.smooth_l1_beta);
      optimizer->zero_grad();
      loss.backward();
      if (config.clip_max_norm > 0.0)
        clip_gradient_norm(params, config.clip_max_norm);
      optimizer->step();
      train_loss += finite_loss(loss, "roi") * batch.size();
      seen += batch.size();
    }
    train_loss /= static_cast<double>(seen);

    double val_loss = 0.0;
    {
      torch::NoGradGuard no_grad;
      model->eval();
      for (const auto& batch :
           chunked(partition_indices(val.size()), config.batch_size)) {
        auto [x, levels, targets] = regression_batch(val, batch);
        auto loss =
            smooth_l1(model->forward(x, levels), targets, config.smooth_l1_beta);
        val_loss += loss.item<double>() * static_cast<double>(batch.size());
      }
      val_loss /= static_cast<double>(val.size());
    }
    const double rmse = regression_rmse(model, val, config.batch_size);

    EpochRecord rec;
    rec.epoch = epoch + 1;
    rec.train_loss = train_loss;
    rec.val_loss = val_loss;
    rec.lr = plateau.lr;
    rec.val_rmse_px = rmse;
    result.history.epochs.push_back(rec);

    if (rmse < best_rmse) {
      best_rmse = rmse;
      result.best_epoch = epoch + 1;
      save_checkpoint(result.best_checkpoint,
                      {1, "roi", preset_to_string(config.preset), epoch + 1,
                       config.hash(), {{"val_rmse_px", rmse}}},
                      {{"regressor", model.ptr()}});
    }
    plateau = plateau_step(plateau, rmse, PlateauMode::Min,
                           config.plateau_patience, config.plateau_factor,
                           config.plateau_min_delta);
  }

  save_checkpoint(
      result.last_checkpoint,
      {1, "roi", preset_to_string(config.preset), config.epochs, config.hash(),
       {{"val_rmse_px", result.history.epochs.back().val_rmse_px.value()}}},
      {{"regressor", model.ptr()}});
  result.history.save_csv(out_dir / "history.csv");
  return result;
}

}  // namespace discgrade
