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
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "arow/attack.hpp"
#include "arow/data.hpp"
#include "arow/model.hpp"
#include "arow/objective.hpp"
#include "arow/train.hpp"

namespace arow {

struct DatasetSection {
  enum class Kind { kTwoMoons, kGaussianBlobs, kIdx };
  Kind kind = Kind::kTwoMoons;
  // two_moons
  std::size_t n = 0;
  double noise_sd = 0.0;
  // gaussian_blobs
  std::size_t classes = 0;
  std::size_t dim = 0;
  std::size_t n_per_class = 0;
  double center_spread = 0.0;
  // idx
  std::string images_path;
  std::string labels_path;
  std::optional<std::size_t> limit;

  std::uint64_t seed = 0;
  std::array<double, 2> split{0.8, 0.2};
  std::uint64_t split_seed = 0;
};

struct TrainSection {
  int epochs = 1;
  std::size_t batch_size = 128;
  double base_lr = 0.1;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  std::vector<int> lr_drop_epochs;
  double lr_drop_factor = 0.1;
  std::optional<int> swa_start_epoch;
  std::optional<double> ema_decay;
  std::string attack_name;  ///< key into the attacks map
};

struct EvalSection {
  std::string attack_name;
  int restarts = 1;
  std::optional<std::string> bucket_reference;  ///< checkpoint path
};

struct VerifySection {
  int trials = 100;
  std::size_t samples_per_trial = 50;
  int grid_points = 21;
  std::size_t dim = 2;
  std::size_t classes = 2;
  std::vector<std::size_t> hidden{8};
  std::array<double, 2> epsilon_range{0.02, 0.1};
  std::optional<std::string> checkpoint;  ///< extra trained-model check
  std::optional<double> epsilon;          ///< radius for the checkpoint check
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::string output_dir;
  DatasetSection dataset;
  MlpSpec model;
  std::map<std::string, AttackConfig> attacks;
  ObjectiveSpec objective;
  std::optional<TrainSection> train;
  std::optional<EvalSection> eval;
  std::optional<VerifySection> verify;

  const AttackConfig& attack(const std::string& name) const;
  TrainConfig train_config() const;  ///< resolved train + objective + attacks
};

/// Strict parse: unknown keys anywhere are ConfigErrors naming the path.
RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(const nlohmann::json& j, const std::string& source);

/// Full dataset described by the section (before splitting).
Dataset build_dataset(const DatasetSection& section);

/// (train split, eval split).
std::pair<Dataset, Dataset> build_splits(const DatasetSection& section);

/// Canonical JSON echo of the resolved config, embedded in artifacts.
nlohmann::json config_to_json(const RunConfig& cfg);

}  // namespace arow
