#include "discgrade/run_config.hpp"

#include <nlohmann/json.hpp>

namespace discgrade {

std::string preset_to_string(ModelPreset p) {
  return p == ModelPreset::Standard18 ? "standard-18" : "tiny";
}

ModelPreset preset_from_string(const std::string& s) {
  const std::string v = to_lower(trim(s));
  if (v == "standard-18" || v == "standard" || v == "resnet18")
    return ModelPreset::Standard18;
  if (v == "tiny") return ModelPreset::Tiny;
  throw ValidationError("unknown model preset: '" + s + "'");
}

int classifier_input_size(ModelPreset p) {
  return p == ModelPreset::Standard18 ? 224 : 64;
}

int regressor_input_size(ModelPreset p) {
  return p == ModelPreset::Standard18 ? 256 : 128;
}

std::string stage_to_string(Stage s) {
  switch (s) {
    case Stage::Pretrain: return "pretrain";
    case Stage::Finetune: return "finetune";
    case Stage::Roi: return "roi";
  }
  throw DataError("invalid Stage");
}

Stage stage_from_string(const std::string& s) {
  const std::string v = to_lower(trim(s));
  if (v == "pretrain") return Stage::Pretrain;
  if (v == "finetune") return Stage::Finetune;
  if (v == "roi") return Stage::Roi;
  throw ValidationError("unknown stage: '" + s + "'");
}

std::string optimizer_to_string(OptimizerKind k) {
  return k == OptimizerKind::AdamW ? "adamw" : "sgd-momentum";
}

OptimizerKind optimizer_from_string(const std::string& s) {
  const std::string v = to_lower(trim(s));
  if (v == "adamw") return OptimizerKind::AdamW;
  if (v == "sgd-momentum" || v == "sgd") return OptimizerKind::SgdMomentum;
  throw ValidationError("unknown optimizer: '" + s + "'");
}

std::string scheduler_to_string(SchedulerKind k) {
  return k == SchedulerKind::Cosine ? "cosine" : "plateau";
}

SchedulerKind scheduler_from_string(const std::string& s) {
  const std::string v = to_lower(trim(s));
  if (v == "cosine") return SchedulerKind::Cosine;
  if (v == "plateau") return SchedulerKind::Plateau;
  throw ValidationError("unknown scheduler: '" + s + "'");
}

RunConfig RunConfig::defaults_for(Stage stage, ModelPreset preset) {
  RunConfig c;
  c.stage = stage;
  c.preset = preset;
  c.preprocess.model_input_size = classifier_input_size(preset);
  c.preprocess.regression_input_size = regressor_input_size(preset);
  switch (stage) {
    case Stage::Pretrain:
      c.epochs = 60;
      c.batch_size = 32;
      c.lr = 1e-3;
      c.weight_decay = 1e-4;
      c.scheduler = SchedulerKind::Cosine;
      c.clip_max_norm = 1.0;
      break;
    case Stage::Finetune:
      c.epochs = 40;
      c.batch_size = 24;
      c.lr = 5e-4;           // classification head
      c.backbone_lr = 5e-5;  // layer4
      c.weight_decay = 1e-4;
      c.scheduler = SchedulerKind::Plateau;
      c.plateau_patience = 4;
      c.plateau_factor = 0.5;
      c.clip_max_norm = 0.0;
      c.augment.enabled = false;  // deterministic preprocessing only
      break;
    case Stage::Roi:
      c.epochs = 40;
      c.batch_size = 32;
      c.lr = 1e-4;
      c.weight_decay = 0.01;
      c.scheduler = SchedulerKind::Plateau;
      c.plateau_patience = 3;
      c.plateau_factor = 0.1;
      c.clip_max_norm = 0.0;
      c.augment.enabled = false;
      break;
  }
  return c;
}

void RunConfig::validate() const {
  if (epochs < 1) throw ValidationError("config: epochs must be >= 1");
  if (batch_size < 1) throw ValidationError("config: batch_size must be >= 1");
  if (stage == Stage::Pretrain && num_views < 2)
    throw ValidationError("config: pretraining needs num_views >= 2");
  if (!(tau > 0.0)) throw ValidationError("config: tau must be > 0");
  if (!(lr > 0.0) || (stage == Stage::Finetune && !(backbone_lr > 0.0)))
    throw ValidationError("config: learning rates must be > 0");
  if (weight_decay < 0.0) throw ValidationError("config: negative weight_decay");
  if (plateau_patience < 0) throw ValidationError("config: negative patience");
  if (!(plateau_factor > 0.0 && plateau_factor < 1.0))
    throw ValidationError("config: plateau factor must be in (0,1)");
  for (double a : focal_alpha) {
    if (!(a > 0.0)) throw ValidationError("config: focal alpha must be positive");
  }
  if (focal_gamma < 0.0) throw ValidationError("config: focal gamma must be >= 0");
  if (smooth_l1_beta < 0.0) throw ValidationError("config: smooth_l1 beta must be >= 0");
  preprocess.validate();
  if (augment.enabled) augment.validate();
}

nlohmann::json run_config_to_json(const RunConfig& c) {
  nlohmann::json j;
  j["stage"] = stage_to_string(c.stage);
  j["preset"] = preset_to_string(c.preset);
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["num_views"] = c.num_views;
  j["tau"] = c.tau;
  j["optimizer"] = optimizer_to_string(c.optimizer);
  j["lr"] = c.lr;
  j["backbone_lr"] = c.backbone_lr;
  j["weight_decay"] = c.weight_decay;
  j["momentum"] = c.momentum;
  j["scheduler"] = scheduler_to_string(c.scheduler);
  j["plateau_patience"] = c.plateau_patience;
  j["plateau_factor"] = c.plateau_factor;
  j["plateau_min_delta"] = c.plateau_min_delta;
  j["clip_max_norm"] = c.clip_max_norm;
  j["focal_alpha"] = c.focal_alpha;
  j["focal_gamma"] = c.focal_gamma;
  j["smooth_l1_beta"] = c.smooth_l1_beta;
  j["seed"] = c.seed;
  j["roi_init_weights"] = c.roi_init_weights;
  j["augment"] = {
      {"enabled", c.augment.enabled},
      {"crop_scale", {c.augment.crop_scale.first, c.augment.crop_scale.second}},
      {"hflip_prob", c.augment.hflip_prob},
      {"rotation_deg", {c.augment.rotation_deg.first, c.augment.rotation_deg.second}},
      {"brightness_jitter", c.augment.brightness_jitter},
      {"contrast_jitter", c.augment.contrast_jitter},
  };
  j["preprocess"] = {
      {"roi_size", c.preprocess.roi_size},
      {"pad_width", c.preprocess.pad_width},
      {"pad_value", c.preprocess.pad_value},
      {"model_input_size", c.preprocess.model_input_size},
      {"regression_input_size", c.preprocess.regression_input_size},
      {"channel_mean", c.preprocess.channel_mean},
      {"channel_std", c.preprocess.channel_std},
  };
  return j;
}

void apply_run_config_json(RunConfig& c, const nlohmann::json& j) {
  if (j.contains("stage")) c.stage = stage_from_string(j["stage"].get<std::string>());
  if (j.contains("preset"))
    c.preset = preset_from_string(j["preset"].get<std::string>());
  if (j.contains("epochs")) c.epochs = j["epochs"].get<int>();
  if (j.contains("batch_size")) c.batch_size = j["batch_size"].get<int>();
  if (j.contains("num_views")) c.num_views = j["num_views"].get<int>();
  if (j.contains("tau")) c.tau = j["tau"].get<double>();
  if (j.contains("optimizer"))
    c.optimizer = optimizer_from_string(j["optimizer"].get<std::string>());
  if (j.contains("lr")) c.lr = j["lr"].get<double>();
  if (j.contains("backbone_lr")) c.backbone_lr = j["backbone_lr"].get<double>();
  if (j.contains("weight_decay")) c.weight_decay = j["weight_decay"].get<double>();
  if (j.contains("momentum")) c.momentum = j["momentum"].get<double>();
  if (j.contains("scheduler"))
    c.scheduler = scheduler_from_string(j["scheduler"].get<std::string>());
  if (j.contains("plateau_patience"))
    c.plateau_patience = j["plateau_patience"].get<int>();
  if (j.contains("plateau_factor"))
    c.plateau_factor = j["plateau_factor"].get<double>();
  if (j.contains("plateau_min_delta"))
    c.plateau_min_delta = j["plateau_min_delta"].get<double>();
  if (j.contains("clip_max_norm"))
    c.clip_max_norm = j["clip_max_norm"].get<double>();
  if (j.contains("focal_alpha")) {
    auto a = j["focal_alpha"];
    for (int i = 0; i < 3; ++i) c.focal_alpha[i] = a.at(i).get<double>();
  }
  if (j.contains("focal_gamma")) c.focal_gamma = j["focal_gamma"].get<double>();
  if (j.contains("smooth_l1_beta"))
    c.smooth_l1_beta = j["smooth_l1_beta"].get<double>();
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("roi_init_weights"))
    c.roi_init_weights = j["roi_init_weights"].get<std::string>();
  if (j.contains("augment")) {
    const auto& a = j["augment"];
    if (a.contains("enabled")) c.augment.enabled = a["enabled"].get<bool>();
    if (a.contains("crop_scale")) {
      c.augment.crop_scale = {a["crop_scale"].at(0).get<double>(),
                              a["crop_scale"].at(1).get<double>()};
    }
    if (a.contains("hflip_prob")) c.augment.hflip_prob = a["hflip_prob"].get<double>();
    if (a.contains("rotation_deg")) {
      c.augment.rotation_deg = {a["rotation_deg"].at(0).get<double>(),
                                a["rotation_deg"].at(1).get<double>()};
    }
    if (a.contains("brightness_jitter"))
      c.augment.brightness_jitter = a["brightness_jitter"].get<double>();
    if (a.contains("contrast_jitter"))
      c.augment.contrast_jitter = a["contrast_jitter"].get<double>();
  }
  if (j.contains("preprocess")) {
    const auto& p = j["preprocess"];
    if (p.contains("roi_size")) c.preprocess.roi_size = p["roi_size"].get<int>();
    if (p.contains("pad_width")) c.preprocess.pad_width = p["pad_width"].get<int>();
    if (p.contains("pad_value")) c.preprocess.pad_value = p["pad_value"].get<float>();
    if (p.contains("model_input_size"))
      c.preprocess.model_input_size = p["model_input_size"].get<int>();
    if (p.contains("regression_input_size"))
      c.preprocess.regression_input_size = p["regression_input_size"].get<int>();
    if (p.contains("channel_mean"))
      c.preprocess.channel_mean = p["channel_mean"].get<float>();
    if (p.contains("channel_std"))
      c.preprocess.channel_std = p["channel_std"].get<float>();
  }
}

std::string RunConfig::hash() const {
  return hex64(fnv1a64(run_config_to_json(*this).dump()));
}

}  // namespace discgrade
