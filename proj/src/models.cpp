#include "discgrade/models.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>

namespace discgrade {

BasicBlockImpl::BasicBlockImpl(int in_channels, int out_channels, int stride) {
  conv1 = register_module(
      "conv1", torch::nn::Conv2d(torch::nn::Conv2dOptions(in_channels, out_channels, 3)
                                     .stride(stride)
                                     .padding(1)
                                     .bias(false)));
  bn1 = register_module("bn1", torch::nn::BatchNorm2d(out_channels));
  conv2 = register_module(
      "conv2", torch::nn::Conv2d(torch::nn::Conv2dOptions(out_channels, out_channels, 3)
                                     .stride(1)
                                     .padding(1)
                                     .bias(false)));
  bn2 = register_module("bn2", torch::nn::BatchNorm2d(out_channels));
  if (stride != 1 || in_channels != out_channels) {
    downsample = register_module(
        "downsample",
        torch::nn::Sequential(
            torch::nn::Conv2d(torch::nn::Conv2dOptions(in_channels, out_channels, 1)
                                  .stride(stride)
                                  .bias(false)),
            torch::nn::BatchNorm2d(out_channels)));
  }
}

torch::Tensor BasicBlockImpl::forward(torch::Tensor x) {
  auto identity = downsample ? downsample->forward(x) : x;
  auto out = torch::relu(bn1->forward(conv1->forward(x)));
  out = bn2->forward(conv2->forward(out));
  return torch::relu(out + identity);
}

namespace {

torch::nn::Sequential make_layer(int in_channels, int out_channels, int blocks,
                                 int stride) {
  torch::nn::Sequential layer;
  layer->push_back(BasicBlock(in_channels, out_channels, stride));
  for (int i = 1; i < blocks; ++i) {
    layer->push_back(BasicBlock(out_channels, out_channels, 1));
  }
  return layer;
}

}  // namespace

ResNetEncoderImpl::ResNetEncoderImpl(ModelPreset preset_, int input_channels_)
    : preset(preset_), input_channels(input_channels_) {
  if (preset == ModelPreset::Standard18) {
    stem = register_module(
        "stem",
        torch::nn::Sequential(
            torch::nn::Conv2d(torch::nn::Conv2dOptions(input_channels, 64, 7)
                                  .stride(2)
                                  .padding(3)
                                  .bias(false)),
            torch::nn::BatchNorm2d(64), torch::nn::ReLU(),
            torch::nn::MaxPool2d(torch::nn::MaxPool2dOptions(3).stride(2).padding(1))));
    layer1 = register_module("layer1", make_layer(64, 64, 2, 1));
    layer2 = register_module("layer2", make_layer(64, 128, 2, 2));
    layer3 = register_module("layer3", make_layer(128, 256, 2, 2));
    layer4 = register_module("layer4", make_layer(256, 512, 2, 2));
  } else {
    stem = register_module(
        "stem",
        torch::nn::Sequential(
            torch::nn::Conv2d(torch::nn::Conv2dOptions(input_channels, 16, 3)
                                  .stride(2)
                                  .padding(1)
                                  .bias(false)),
            torch::nn::BatchNorm2d(16), torch::nn::ReLU(),
            torch::nn::MaxPool2d(torch::nn::MaxPool2dOptions(3).stride(2).padding(1))));
    layer1 = register_module("layer1", make_layer(16, 16, 1, 1));
    layer2 = register_module("layer2", make_layer(16, 32, 1, 2));
    layer3 = register_module("layer3", make_layer(32, 64, 1, 2));
    // One reduced block, then a 1x1 expansion so every preset pools to 512.
    auto l4 = make_layer(64, 128, 1, 2);
    l4->push_back(torch::nn::Conv2d(
        torch::nn::Conv2dOptions(128, kFeatureDim, 1).bias(false)));
    l4->push_back(torch::nn::BatchNorm2d(kFeatureDim));
    l4->push_back(torch::nn::ReLU());
    layer4 = register_module("layer4", l4);
  }
}

torch::Tensor ResNetEncoderImpl::forward(torch::Tensor x) {
  if (x.dim() != 4 || x.size(1) != input_channels) {
    throw ValidationError("encoder expects B x " + std::to_string(input_channels) +
                          " x H x W input");
  }
  x = stem->forward(x);
  x = layer1->forward(x);
  x = layer2->forward(x);
  x = layer3->forward(x);
  x = layer4->forward(x);
  x = torch::adaptive_avg_pool2d(x, {1, 1});
  return x.flatten(1);
}

std::vector<torch::Tensor> ResNetEncoderImpl::stage_parameters(
    const std::string& stage) {
  torch::nn::Sequential* seq = nullptr;
  if (stage == "stem") seq = &stem;
  else if (stage == "layer1") seq = &layer1;
  else if (stage == "layer2") seq = &layer2;
  else if (stage == "layer3") seq = &layer3;
  else if (stage == "layer4") seq = &layer4;
  else throw ValidationError("unknown encoder stage: '" + stage + "'");
  return (*seq)->parameters();
}

void ResNetEncoderImpl::train_with_frozen_stages(
    const std::vector<std::string>& frozen) {
  train();
  for (const auto& name : frozen) {
    if (name == "stem") stem->eval();
    else if (name == "layer1") layer1->eval();
    else if (name == "layer2") layer2->eval();
    else if (name == "layer3") layer3->eval();
    else if (name == "layer4") layer4->eval();
    else throw ValidationError("unknown encoder stage: '" + name + "'");
  }
}

// ---------------------------------------------------------------------------

ProjectionHeadImpl::ProjectionHeadImpl(int in_dim, int hidden_dim, int out_dim) {
  fc1 = register_module("fc1", torch::nn::Linear(in_dim, hidden_dim));
  bn = register_module("bn", torch::nn::BatchNorm1d(hidden_dim));
  fc2 = register_module("fc2", torch::nn::Linear(hidden_dim, out_dim));
}

torch::Tensor ProjectionHeadImpl::forward(torch::Tensor z) {
  return fc2->forward(torch::relu(bn->forward(fc1->forward(z))));
}

torch::Tensor project(ProjectionHead& head, const torch::Tensor& z) {
  auto out = head->forward(z);
  auto norms = out.norm(2, 1, true);
  if (norms.min().item<double>() <= 0.0) {
    throw NumericError("projection collapsed to the zero vector");
  }
  return out / norms;
}

std::vector<float> pool_disc(const std::vector<std::vector<float>>& embeddings) {
  if (embeddings.empty()) throw DataError("pool_disc: empty embedding set");
  const std::size_t dim = embeddings.front().size();
  for (const auto& e : embeddings) {
    if (e.size() != dim) throw DataError("pool_disc: ragged embedding set");
  }
  if (embeddings.size() == 1) return embeddings.front();

  // Sort-then-sum: fixes the accumulation order so any permutation of the
  // input set yields bitwise-identical means.
  std::vector<const std::vector<float>*> order;
  order.reserve(embeddings.size());
  for (const auto& e : embeddings) order.push_back(&e);
  std::sort(order.begin(), order.end(),
            [](const auto* a, const auto* b) {
              return std::lexicographical_compare(a->begin(), a->end(),
                                                  b->begin(), b->end());
            });
  std::vector<float> mean(dim, 0.0f);
  for (const auto* e : order) {
    for (std::size_t i = 0; i < dim; ++i) mean[i] += (*e)[i];
  }
  const float inv = 1.0f / static_cast<float>(embeddings.size());
  for (float& v : mean) v *= inv;
  return mean;
}

DiscHeadImpl::DiscHeadImpl(int in_dim, int num_classes) {
  fc = register_module("fc", torch::nn::Linear(in_dim, num_classes));
}

torch::Tensor DiscHeadImpl::forward(torch::Tensor pooled) {
  return fc->forward(pooled);
}

int predicted_grade(const torch::Tensor& logits_row) {
  auto row = logits_row.to(torch::kFloat64).contiguous();
  if (row.numel() != 3) throw DataError("predicted_grade: expected 3 logits");
  const double* p = row.data_ptr<double>();
  int best = 0;
  for (int g = 1; g < 3; ++g) {
    if (p[g] > p[best]) best = g;  // strict: ties keep the lower grade
  }
  return best;
}

std::vector<int> predicted_grades(const torch::Tensor& logits) {
  std::vector<int> out;
  out.reserve(logits.size(0));
  for (std::int64_t i = 0; i < logits.size(0); ++i) {
    out.push_back(predicted_grade(logits[i]));
  }
  return out;
}

RoiRegressorImpl::RoiRegressorImpl(ModelPreset preset_) : preset(preset_) {
  backbone = register_module("backbone", ResNetEncoder(preset, 3));
  level_embedding = register_module(
      "level_embedding", torch::nn::Embedding(5, kLevelEmbeddingDim));
  fuse = register_module(
      "fuse", torch::nn::Linear(kFeatureDim + kLevelEmbeddingDim, 256));
  dropout = register_module("dropout", torch::nn::Dropout(0.5));
  out = register_module("out", torch::nn::Linear(256, 2));
}

torch::Tensor RoiRegressorImpl::forward(torch::Tensor x, torch::Tensor levels) {
  auto feats = backbone->forward(x);
  auto emb = level_embedding->forward(levels.to(torch::kInt64));
  auto fused = torch::relu(fuse->forward(torch::cat({feats, emb}, 1)));
  return torch::sigmoid(out->forward(dropout->forward(fused)));
}

// ---------------------------------------------------------------------------

FinetuneParamGroups build_finetune_param_groups(
    ResNetEncoder& encoder, DiscHead& head,
    const std::vector<std::string>& frozen_stages, double backbone_lr,
    double head_lr) {
  FinetuneParamGroups groups;
  groups.backbone_lr = backbone_lr;
  groups.head_lr = head_lr;

  std::vector<std::string> tunable = {"stem", "layer1", "layer2", "layer3",
                                      "layer4"};
  for (const auto& stage : frozen_stages) {
    auto params = encoder->stage_parameters(stage);  // validates the name
    for (auto& p : params) {
      p.set_requires_grad(false);
      groups.frozen.push_back(p);
    }
    std::erase(tunable, stage);
  }
  for (const auto& stage : tunable) {
    for (auto& p : encoder->stage_parameters(stage)) {
      groups.backbone.push_back(p);
    }
  }
  groups.head = head->parameters();
  return groups;
}

// ---------------------------------------------------------------------------

fs::path checkpoint_meta_path(const fs::path& pt_path) {
  fs::path p = pt_path;
  p.replace_extension(".json");
  return p;
}

void save_checkpoint(
    const fs::path& pt_path, const CheckpointMeta& meta,
    const std::vector<std::pair<std::string, std::shared_ptr<torch::nn::Module>>>&
        modules) {
  if (pt_path.has_parent_path()) fs::create_directories(pt_path.parent_path());
  torch::serialize::OutputArchive archive;
  for (const auto& [name, module] : modules) {
    torch::serialize::OutputArchive sub;
    module->save(sub);
    archive.write(name, sub);
  }
  archive.save_to(pt_path.string());

  nlohmann::json j;
  j["format_version"] = meta.format_version;
  j["stage"] = meta.stage;
  j["preset"] = meta.preset;
  j["epoch"] = meta.epoch;
  j["config_hash"] = meta.config_hash;
  j["metrics"] = meta.metrics;
  write_text_file(checkpoint_meta_path(pt_path), j.dump(2) + "\n");
}

CheckpointMeta read_checkpoint_meta(const fs::path& pt_path) {
  const fs::path meta_path = checkpoint_meta_path(pt_path);
  if (!fs::exists(pt_path) || !fs::exists(meta_path)) {
    throw ValidationError("checkpoint not found: " + pt_path.string());
  }
  nlohmann::json j = nlohmann::json::parse(read_text_file(meta_path));
  CheckpointMeta meta;
  meta.format_version = j.at("format_version").get<int>();
  meta.stage = j.at("stage").get<std::string>();
  meta.preset = j.at("preset").get<std::string>();
  meta.epoch = j.at("epoch").get<int>();
  meta.config_hash = j.at("config_hash").get<std::string>();
  if (j.contains("metrics")) {
    for (auto& [k, v] : j.at("metrics").items()) {
      meta.metrics[k] = v.get<double>();
    }
  }
  return meta;
}

void load_checkpoint(
    const fs::path& pt_path,
    const std::vector<std::pair<std::string, std::shared_ptr<torch::nn::Module>>>&
        modules) {
  torch::serialize::InputArchive archive;
  try {
    archive.load_from(pt_path.string());
  } catch (const c10::Error& e) {
    throw IoError("cannot load checkpoint " + pt_path.string() + ": " + e.msg());
  }
  for (const auto& [name, module] : modules) {
    torch::serialize::InputArchive sub;
    if (!archive.try_read(name, sub)) {
      throw ValidationError("checkpoint " + pt_path.string() +
                            " is missing module '" + name + "' (wrong stage?)");
    }
    module->load(sub);
  }
}

std::vector<torch::Tensor> snapshot_state(const torch::nn::Module& m) {
  std::vector<torch::Tensor> out;
  for (const auto& p : m.parameters()) out.push_back(p.detach().clone());
  for (const auto& b : m.buffers()) out.push_back(b.detach().clone());
  return out;
}

double max_abs_delta(const std::vector<torch::Tensor>& before,
                     const std::vector<torch::Tensor>& after) {
  if (before.size() != after.size())
    throw DataError("max_abs_delta: snapshot size mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < before.size(); ++i) {
    if (before[i].numel() == 0) continue;
    worst = std::max(
        worst,
        (before[i].to(torch::kFloat64) - after[i].to(torch::kFloat64))
            .abs()
            .max()
            .item<double>());
  }
  return worst;
}

}  // namespace discgrade
