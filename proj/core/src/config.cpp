// Copyright (c) 2026 arowlab Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "arow/config.hpp"

#include <cmath>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "arow/error.hpp"
#include "arow/io_util.hpp"

namespace arow {

namespace {

using nlohmann::json;

/// Typed, path-tracking view over one JSON object; rejects unknown keys.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) {
      throw ConfigError(fmt::format("config: {} must be an object", path_));
    }
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  const json& raw(const std::string& key) {
    require_present(key);
    return j_.at(key);
  }

  template <typename T>
  T get(const std::string& key) {
    require_present(key);
    return convert<T>(key);
  }

  template <typename T>
  T get_or(const std::string& key, T fallback) {
    if (!has(key)) return fallback;
    return convert<T>(key);
  }

  template <typename T>
  std::optional<T> get_opt(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return convert<T>(key);
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.contains(key)) {
        throw ConfigError(fmt::format("config: unknown key {}.{}", path_, key));
      }
    }
  }

  const std::string& path() const { return path_; }

 private:
  void require_present(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key) || j_.at(key).is_null()) {
      throw ConfigError(fmt::format("config: missing key {}.{}", path_, key));
    }
  }

  template <typename T>
  T convert(const std::string& key) {
    try {
      return j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(fmt::format("config: bad value at {}.{}: {}", path_,
                                    key, e.what()));
    }
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

Surrogate surrogate_from_name(const std::string& name, const std::string& path) {
  if (name == "ce" || name == "cross-entropy") return Surrogate::kCrossEntropy;
  if (name == "kl" || name == "kl-to-clean") return Surrogate::kKlToClean;
  throw ConfigError(fmt::format("config: {} has unknown surrogate '{}'", path, name));
}

const char* surrogate_name(Surrogate s) {
  return s == Surrogate::kCrossEntropy ? "ce" : "kl";
}

AttackConfig parse_attack(const json& j, const std::string& path) {
  Section s(j, path);
  AttackConfig a;
  a.epsilon = s.get<double>("epsilon");
  a.eta = s.get_or<double>("eta", 0.0);
  a.steps = s.get<int>("steps");
  a.surrogate = surrogate_from_name(s.get<std::string>("surrogate"), path);
  a.random_init = s.get_or<bool>("random_init", true);
  if (s.has("clamp_box")) {
    const auto box = s.get<std::vector<double>>("clamp_box");
    if (box.size() != 2) {
      throw ConfigError(fmt::format("config: {}.clamp_box needs [lo, hi]", path));
    }
    a.clamp_box = {box[0], box[1]};
  } else {
    a.clamp_box = {{0.0, 1.0}};  // the data module normalizes into [0, 1]
  }
  s.finish();
  a.validate();
  return a;
}

DatasetSection parse_dataset(const json& j) {
  Section s(j, "dataset");
  DatasetSection d;
  const std::string kind = s.get<std::string>("kind");
  if (kind == "two_moons") {
    d.kind = DatasetSection::Kind::kTwoMoons;
    d.n = s.get<std::size_t>("n");
    d.noise_sd = s.get<double>("noise_sd");
    d.seed = s.get<std::uint64_t>("seed");
  } else if (kind == "gaussian_blobs") {
    d.kind = DatasetSection::Kind::kGaussianBlobs;
    d.classes = s.get<std::size_t>("classes");
    d.dim = s.get<std::size_t>("dim");
    d.n_per_class = s.get<std::size_t>("n_per_class");
    d.center_spread = s.get<double>("center_spread");
    d.noise_sd = s.get<double>("noise_sd");
    d.seed = s.get<std::uint64_t>("seed");
  } else if (kind == "idx") {
    d.kind = DatasetSection::Kind::kIdx;
    d.images_path = s.get<std::string>("images");
    d.labels_path = s.get<std::string>("labels");
    d.limit = s.get_opt<std::size_t>("limit");
  } else {
    throw ConfigError(fmt::format("config: dataset.kind '{}' unknown", kind));
  }
  const auto split = s.get_or<std::vector<double>>("split", {0.8, 0.2});
  if (split.size() != 2 || std::abs(split[0] + split[1] - 1.0) > 1e-12 ||
      !(split[0] > 0.0) || !(split[1] > 0.0)) {
    throw ConfigError("config: dataset.split must be two positive fractions summing to 1");
  }
  d.split = {split[0], split[1]};
  d.split_seed = s.get_or<std::uint64_t>("split_seed", 0);
  s.finish();
  return d;
}

MlpSpec parse_model(const json& j) {
  Section s(j, "model");
  MlpSpec m;
  m.input_dim = s.get<std::size_t>("input_dim");
  m.hidden = s.get_or<std::vector<std::size_t>>("hidden", {});
  m.classes = s.get<std::size_t>("classes");
  m.seed = s.get_or<std::uint64_t>("init_seed", 0);
  s.finish();
  m.validate();
  return m;
}

ObjectiveSpec parse_objective(const json& j) {
  Section s(j, "objective");
  ObjectiveSpec o;
  o.kind = objective_kind_from_name(s.get<std::string>("kind"));
  o.lambda = s.get_or<double>("lambda", 1.0);
  o.alpha = s.get_or<double>("alpha", 0.0);
  o.gamma = s.get_or<double>("gamma", 0.0);
  o.detach_weight = s.get_or<bool>("detach_weight", false);
  o.pretrained = s.get_opt<std::string>("pretrained");
  s.finish();
  o.validate();
  return o;
}

TrainSection parse_train(const json& j) {
  Section s(j, "train");
  TrainSection t;
  t.epochs = s.get<int>("epochs");
  t.batch_size = s.get<std::size_t>("batch_size");
  t.base_lr = s.get<double>("base_lr");
  t.momentum = s.get_or<double>("momentum", 0.9);
  t.weight_decay = s.get_or<double>("weight_decay", 5e-4);
  t.lr_drop_epochs = s.get_or<std::vector<int>>("lr_drop_epochs", {});
  t.lr_drop_factor = s.get_or<double>("lr_drop_factor", 0.1);
  t.swa_start_epoch = s.get_opt<int>("swa_start_epoch");
  t.ema_decay = s.get_opt<double>("ema_decay");
  t.attack_name = s.get<std::string>("attack");
  s.finish();
  return t;
}

EvalSection parse_eval(const json& j) {
  Section s(j, "eval");
  EvalSection e;
  e.attack_name = s.get<std::string>("attack");
  e.restarts = s.get_or<int>("restarts", 1);
  e.bucket_reference = s.get_opt<std::string>("bucket_reference");
  s.finish();
  if (e.restarts < 1) throw ConfigError("config: eval.restarts must be >= 1");
  return e;
}

VerifySection parse_verify(const json& j) {
  Section s(j, "verify");
  VerifySection v;
  v.trials = s.get_or<int>("trials", 100);
  v.samples_per_trial = s.get_or<std::size_t>("samples_per_trial", 50);
  v.grid_points = s.get_or<int>("grid_points", 21);
  v.dim = s.get_or<std::size_t>("dim", 2);
  v.classes = s.get_or<std::size_t>("classes", 2);
  v.hidden = s.get_or<std::vector<std::size_t>>("hidden", {8});
  const auto er = s.get_or<std::vector<double>>("epsilon_range", {0.02, 0.1});
  if (er.size() != 2 || !(er[0] >= 0.0) || !(er[1] >= er[0])) {
    throw ConfigError("config: verify.epsilon_range must be [lo, hi] with 0 <= lo <= hi");
  }
  v.epsilon_range = {er[0], er[1]};
  v.checkpoint = s.get_opt<std::string>("checkpoint");
  v.epsilon = s.get_opt<double>("epsilon");
  s.finish();
  if (v.trials < 1) throw ConfigError("config: verify.trials must be >= 1");
  if (v.dim < 1 || v.dim > 3) {
    throw ConfigError("config: verify.dim must be 1, 2 or 3");
  }
  return v;
}

}  // namespace

const AttackConfig& RunConfig::attack(const std::string& name) const {
  const auto it = attacks.find(name);
  if (it == attacks.end()) {
    throw ConfigError(fmt::format("config: attack '{}' is not defined", name));
  }
  return it->second;
}

TrainConfig RunConfig::train_config() const {
  if (!train) throw ConfigError("config: train section missing");
  TrainConfig cfg;
  cfg.epochs = train->epochs;
  cfg.batch_size = train->batch_size;
  cfg.base_lr = train->base_lr;
  cfg.momentum = train->momentum;
  cfg.weight_decay = train->weight_decay;
  cfg.lr_drop_epochs = train->lr_drop_epochs;
  cfg.lr_drop_factor = train->lr_drop_factor;
  cfg.swa_start_epoch = train->swa_start_epoch;
  cfg.ema_decay = train->ema_decay;
  cfg.objective = objective;
  cfg.attack = attack(train->attack_name);
  if (eval) cfg.metrics_attack = attack(eval->attack_name);
  cfg.seed = seed;
  cfg.validate();
  return cfg;
}

RunConfig parse_run_config(const json& j, const std::string& source) {
  Section s(j, source);
  RunConfig cfg;
  cfg.seed = s.get<std::uint64_t>("seed");
  cfg.output_dir = s.get_or<std::string>("output_dir", "");
  cfg.dataset = parse_dataset(s.raw("dataset"));
  cfg.model = parse_model(s.raw("model"));
  {
    const json& a = s.raw("attacks");
    if (!a.is_object() || a.empty()) {
      throw ConfigError("config: attacks must be a non-empty object");
    }
    for (const auto& [name, body] : a.items()) {
      cfg.attacks.emplace(name, parse_attack(body, fmt::format("attacks.{}", name)));
    }
  }
  if (s.has("objective")) cfg.objective = parse_objective(s.raw("objective"));
  if (s.has("train")) cfg.train = parse_train(s.raw("train"));
  if (s.has("eval")) cfg.eval = parse_eval(s.raw("eval"));
  if (s.has("verify")) cfg.verify = parse_verify(s.raw("verify"));
  s.finish();

  if (cfg.train) cfg.attack(cfg.train->attack_name);  // names must resolve
  if (cfg.eval) cfg.attack(cfg.eval->attack_name);
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("config {}: {}", path, e.what()));
  }
  return parse_run_config(j, path);
}

Dataset build_dataset(const DatasetSection& d) {
  switch (d.kind) {
    case DatasetSection::Kind::kTwoMoons:
      return two_moons(d.n, d.noise_sd, d.seed);
    case DatasetSection::Kind::kGaussianBlobs:
      return gaussian_blobs(d.classes, d.dim, d.n_per_class, d.center_spread,
                            d.noise_sd, d.seed);
    case DatasetSection::Kind::kIdx:
      return load_idx(d.images_path, d.labels_path, d.limit);
  }
  throw Error("build_dataset: unhandled kind");
}

std::pair<Dataset, Dataset> build_splits(const DatasetSection& d) {
  return split_dataset(build_dataset(d), d.split[0], d.split_seed);
}

nlohmann::json config_to_json(const RunConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["output_dir"] = cfg.output_dir;

  json d;
  switch (cfg.dataset.kind) {
    case DatasetSection::Kind::kTwoMoons:
      d["kind"] = "two_moons";
      d["n"] = cfg.dataset.n;
      d["noise_sd"] = cfg.dataset.noise_sd;
      d["seed"] = cfg.dataset.seed;
      break;
    case DatasetSection::Kind::kGaussianBlobs:
      d["kind"] = "gaussian_blobs";
      d["classes"] = cfg.dataset.classes;
      d["dim"] = cfg.dataset.dim;
      d["n_per_class"] = cfg.dataset.n_per_class;
      d["center_spread"] = cfg.dataset.center_spread;
      d["noise_sd"] = cfg.dataset.noise_sd;
      d["seed"] = cfg.dataset.seed;
      break;
    case DatasetSection::Kind::kIdx:
      d["kind"] = "idx";
      d["images"] = cfg.dataset.images_path;
      d["labels"] = cfg.dataset.labels_path;
      if (cfg.dataset.limit) d["limit"] = *cfg.dataset.limit;
      break;
  }
  d["split"] = {cfg.dataset.split[0], cfg.dataset.split[1]};
  d["split_seed"] = cfg.dataset.split_seed;
  j["dataset"] = d;

  j["model"] = {{"input_dim", cfg.model.input_dim},
                {"hidden", cfg.model.hidden},
                {"classes", cfg.model.classes},
                {"init_seed", cfg.model.seed}};

  json attacks;
  for (const auto& [name, a] : cfg.attacks) {
    json at = {{"epsilon", a.epsilon},     {"eta", a.eta},
               {"steps", a.steps},         {"surrogate", surrogate_name(a.surrogate)},
               {"random_init", a.random_init}};
    if (a.clamp_box) at["clamp_box"] = {(*a.clamp_box)[0], (*a.clamp_box)[1]};
    attacks[name] = at;
  }
  j["attacks"] = attacks;

  json o = {{"kind", objective_kind_name(cfg.objective.kind)},
            {"lambda", cfg.objective.lambda},
            {"alpha", cfg.objective.alpha},
            {"gamma", cfg.objective.gamma},
            {"detach_weight", cfg.objective.detach_weight}};
  if (cfg.objective.pretrained) o["pretrained"] = *cfg.objective.pretrained;
  j["objective"] = o;

  if (cfg.train) {
    json t = {{"epochs", cfg.train->epochs},
              {"batch_size", cfg.train->batch_size},
              {"base_lr", cfg.train->base_lr},
              {"momentum", cfg.train->momentum},
              {"weight_decay", cfg.train->weight_decay},
              {"lr_drop_epochs", cfg.train->lr_drop_epochs},
              {"lr_drop_factor", cfg.train->lr_drop_factor},
              {"attack", cfg.train->attack_name}};
    if (cfg.train->swa_start_epoch) t["swa_start_epoch"] = *cfg.train->swa_start_epoch;
    if (cfg.train->ema_decay) t["ema_decay"] = *cfg.train->ema_decay;
    j["train"] = t;
  }
  if (cfg.eval) {
    json e = {{"attack", cfg.eval->attack_name}, {"restarts", cfg.eval->restarts}};
    if (cfg.eval->bucket_reference) e["bucket_reference"] = *cfg.eval->bucket_reference;
    j["eval"] = e;
  }
  if (cfg.verify) {
    json v = {{"trials", cfg.verify->trials},
              {"samples_per_trial", cfg.verify->samples_per_trial},
              {"grid_points", cfg.verify->grid_points},
              {"dim", cfg.verify->dim},
              {"classes", cfg.verify->classes},
              {"hidden", cfg.verify->hidden},
              {"epsilon_range",
               {cfg.verify->epsilon_range[0], cfg.verify->epsilon_range[1]}}};
    if (cfg.verify->checkpoint) v["checkpoint"] = *cfg.verify->checkpoint;
    if (cfg.verify->epsilon) v["epsilon"] = *cfg.verify->epsilon;
    j["verify"] = v;
  }
  return j;
}

}  // namespace arow
