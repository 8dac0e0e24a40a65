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

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "arow/attack.hpp"
#include "arow/data.hpp"
#include "arow/model.hpp"
#include "arow/objective.hpp"

namespace arow {

struct TrainConfig {
  int epochs = 1;
  std::size_t batch_size = 128;
  double base_lr = 0.1;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  std::vector<int> lr_drop_epochs;  ///< strictly increasing, < epochs
  double lr_drop_factor = 0.1;
  std::optional<int> swa_start_epoch;  ///< snapshot at end of epochs >= this
  std::optional<double> ema_decay;     ///< per optimizer step when set
  ObjectiveSpec objective;
  AttackConfig attack;                 ///< generation attack (Algorithm-1 inner step)
  std::optional<AttackConfig> metrics_attack;  ///< per-epoch robust metric; defaults to `attack`
  std::uint64_t seed = 0;

  void validate() const;
};

/// Parameter averaging state; the two modes share storage.
struct AveragedState {
  enum class Mode { kSwa, kEma };
  Mode mode = Mode::kSwa;
  std::vector<double> average;
  long count = 0;      ///< SWA snapshots contributed
  double decay = 0.0;  ///< EMA factor
};

/// avg += (theta - avg) / (count + 1)
void swa_update(AveragedState& state, const std::vector<double>& params);
/// avg = decay * avg + (1 - decay) * theta
void ema_update(AveragedState& state, const std::vector<double>& params);

struct SgdState {
  std::vector<double> velocity;
};

/// v = momentum v + (g + weight_decay theta); theta -= lr v  (coupled L2).
void sgd_step(std::vector<double>& params, const std::vector<double>& grads,
              SgdState& state, double lr, double momentum, double weight_decay);

/// base_lr * factor^(number of drop epochs <= epoch); epochs are 0-based.
double lr_at(int epoch, const TrainConfig& cfg);

struct EpochMetrics {
  int epoch = 0;
  double lr = 0.0;
  double objective = 0.0;  ///< mean batch objective over the epoch
  double std_acc = 0.0;    ///< held-out standard accuracy
  double rob_acc = 0.0;    ///< held-out robust accuracy (metrics attack)
};

struct TrainResult {
  ModelParams final_params;
  ModelParams best_params;  ///< highest held-out robust accuracy, earliest wins ties
  int best_epoch = 0;
  std::optional<ModelParams> swa_params;
  std::optional<ModelParams> ema_params;
  std::vector<EpochMetrics> log;
};

struct TrainHooks {
  std::function<void(const EpochMetrics&, const ModelParams&)> on_epoch_end;
};

/// Algorithm-1 outer loop: per batch, generate adversarial examples with the
/// model frozen, then take one SGD step on the objective. (seed, cfg, data)
/// fully determine the trajectory.
TrainResult train(const ModelParams& init, const Dataset& train_set,
                  const Dataset& val_set, const TrainConfig& cfg,
                  const ModelParams* hat_pretrained = nullptr,
                  const TrainHooks* hooks = nullptr);

/// Fixed metrics CSV header shared by training and the CLI.
inline constexpr const char* kMetricsCsvHeader = "epoch,lr,objective,std_acc,rob_acc";

/// Seed of the held-out evaluation stream for a run seed. The per-epoch
/// robust metric and a later cmd-eval agree bit-for-bit because both draw
/// from this stream.
std::uint64_t eval_stream_seed(std::uint64_t run_seed);

std::string metrics_to_csv(const std::vector<EpochMetrics>& log,
                           const std::vector<std::string>& comment_lines);

}  // namespace arow
