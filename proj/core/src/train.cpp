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
#include "arow/train.hpp"

#include <cmath>

#include <fmt/format.h>

#include "arow/error.hpp"
#include "arow/io_util.hpp"
#include "arow/metrics.hpp"

namespace arow {

namespace {
// Stream tags for deriving independent rngs from the run seed.
constexpr std::uint64_t kTagShuffle = 0x5348554646ULL;
constexpr std::uint64_t kTagAttack = 0x41545441434bULL;
constexpr std::uint64_t kTagEval = 0x4556414cULL;
}  // namespace

std::uint64_t eval_stream_seed(std::uint64_t run_seed) {
  return mix_seed(run_seed, kTagEval);
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("train: batch size must be >= 1");
  if (!(base_lr > 0.0)) throw ConfigError("train: base lr must be > 0");
  if (momentum < 0.0 || momentum >= 1.0) {
    throw ConfigError(fmt::format("train: momentum {} outside [0, 1)", momentum));
  }
  if (weight_decay < 0.0) throw ConfigError("train: weight decay must be >= 0");
  int prev = -1;
  for (int e : lr_drop_epochs) {
    if (e <= prev || e >= epochs) {
      throw ConfigError(
          "train: lr drop epochs must be strictly increasing and < epochs");
    }
    prev = e;
  }
  if (swa_start_epoch && (*swa_start_epoch < 0 || *swa_start_epoch >= epochs)) {
    throw ConfigError("train: swa start epoch outside [0, epochs)");
  }
  if (ema_decay && !(*ema_decay > 0.0 && *ema_decay < 1.0)) {
    throw ConfigError("train: ema decay outside (0, 1)");
  }
  objective.validate();
  attack.validate();
  if (metrics_attack) metrics_attack->validate();
}

void swa_update(AveragedState& state, const std::vector<double>& params) {
  if (state.average.empty()) state.average.assign(params.size(), 0.0);
  if (state.average.size() != params.size()) {
    throw ShapeError("swa_update: parameter length changed");
  }
  const double inv = 1.0 / static_cast<double>(state.count + 1);
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.average[i] += (params[i] - state.average[i]) * inv;
  }
  state.count += 1;
}

void ema_update(AveragedState& state, const std::vector<double>& params) {
  if (state.average.empty()) state.average.assign(params.size(), 0.0);
  if (state.average.size() != params.size()) {
    throw ShapeError("ema_update: parameter length changed");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.average[i] = state.decay * state.average[i] +
                       (1.0 - state.decay) * params[i];
  }
}

void sgd_step(std::vector<double>& params, const std::vector<double>& grads,
              SgdState& state, double lr, double momentum, double weight_decay) {
  if (grads.size() != params.size()) {
    throw ShapeError(fmt::format("sgd_step: {} grads for {} params",
                                 grads.size(), params.size()));
  }
  if (state.velocity.empty()) state.velocity.assign(params.size(), 0.0);
  if (state.velocity.size() != params.size()) {
    throw ShapeError("sgd_step: velocity length changed");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i] + weight_decay * params[i];
    state.velocity[i] = momentum * state.velocity[i] + g;
    params[i] -= lr * state.velocity[i];
  }
}

double lr_at(int epoch, const TrainConfig& cfg) {
  if (epoch < 0 || epoch >= cfg.epochs) {
    throw DomainError(fmt::format("lr_at: epoch {} outside [0, {})", epoch,
                                  cfg.epochs));
  }
  double lr = cfg.base_lr;
  for (int e : cfg.lr_drop_epochs) {
    if (e <= epoch) lr *= cfg.lr_drop_factor;
  }
  return lr;
}

TrainResult train(const ModelParams& init, const Dataset& train_set,
                  const Dataset& val_set, const TrainConfig& cfg,
                  const ModelParams* hat_pretrained, const TrainHooks* hooks) {
  cfg.validate();
  train_set.validate();
  val_set.validate();
  if (cfg.batch_size > train_set.size()) {
    throw ConfigError(fmt::format("train: batch size {} exceeds dataset size {}",
                                  cfg.batch_size, train_set.size()));
  }
  if (cfg.objective.kind == ObjectiveKind::kHat && hat_pretrained == nullptr) {
    throw ConfigError("train: hat objective without a pretrained model");
  }

  const AttackConfig& metric_attack =
      cfg.metrics_attack ? *cfg.metrics_attack : cfg.attack;

  ModelParams params = init;
  std::vector<double> flat = params.flatten();
  SgdState sgd;
  AveragedState swa{AveragedState::Mode::kSwa, {}, 0, 0.0};
  AveragedState ema{AveragedState::Mode::kEma, {}, 0,
                    cfg.ema_decay.value_or(0.0)};
  if (cfg.ema_decay) ema.average = flat;  // seeded from the init point

  TrainResult result;
  double best_rob = -1.0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = lr_at(epoch, cfg);
    const auto batch_index =
        batches(train_set.size(), cfg.batch_size,
                mix_seed(cfg.seed, kTagShuffle, static_cast<std::uint64_t>(epoch)),
                /*shuffle=*/true);

    double objective_sum = 0.0;
    for (std::size_t b = 0; b < batch_index.size(); ++b) {
      const Batch batch = gather(train_set, batch_index[b]);

      AttackOutput attack_out;
      if (cfg.objective.needs_attack()) {
        std::mt19937_64 attack_rng(
            mix_seed(cfg.seed, kTagAttack, static_cast<std::uint64_t>(epoch),
                     static_cast<std::uint64_t>(b)));
        attack_out = pgd_attack(params, batch.x, batch.y, batch.rows, cfg.attack,
                                attack_rng);
      }

      Tape tape;
      const TapedMlp model = lift_trainable(tape, params);
      const Tensor x({batch.rows, train_set.dim}, batch.x);
      const Tensor x_adv =
          cfg.objective.needs_attack()
              ? Tensor({batch.rows, train_set.dim}, attack_out.x_adv)
              : x;
      const Tensor loss = objective_loss(
          model, cfg.objective, x, x_adv, batch.y,
          cfg.objective.needs_traces() ? &attack_out.traces : nullptr,
          cfg.attack.steps, hat_pretrained, cfg.attack.clamp_box);
      const double loss_value = loss.value();
      if (!std::isfinite(loss_value)) {
        throw Error(fmt::format("train: non-finite loss at epoch {} batch {}",
                                epoch, b));
      }
      objective_sum += loss_value;

      const Gradients grads = tape.backward(loss);
      const std::vector<double> grad_flat = flatten_gradients(model, grads);
      sgd_step(flat, grad_flat, sgd, lr, cfg.momentum, cfg.weight_decay);
      params = ModelParams::unflatten(params.spec, flat);
      if (cfg.ema_decay) ema_update(ema, flat);
    }

    if (cfg.swa_start_epoch && epoch >= *cfg.swa_start_epoch) {
      swa_update(swa, flat);
    }

    EpochMetrics m;
    m.epoch = epoch;
    m.lr = lr;
    m.objective = objective_sum / static_cast<double>(batch_index.size());
    m.std_acc = standard_accuracy(params, val_set);
    std::mt19937_64 eval_rng(eval_stream_seed(cfg.seed));
    m.rob_acc = robust_accuracy(params, val_set, metric_attack, eval_rng);
    result.log.push_back(m);
    if (m.rob_acc > best_rob) {
      best_rob = m.rob_acc;
      result.best_params = params;
      result.best_epoch = epoch;
    }
    if (hooks && hooks->on_epoch_end) hooks->on_epoch_end(m, params);
  }

  result.final_params = params;
  if (cfg.swa_start_epoch) {
    result.swa_params = ModelParams::unflatten(params.spec, swa.average);
  }
  if (cfg.ema_decay) {
    result.ema_params = ModelParams::unflatten(params.spec, ema.average);
  }
  return result;
}

std::string metrics_to_csv(const std::vector<EpochMetrics>& log,
                           const std::vector<std::string>& comment_lines) {
  std::string out;
  for (const auto& line : comment_lines) {
    out += fmt::format("# {}\n", line);
  }
  out += kMetricsCsvHeader;
  out += '\n';
  for (const auto& m : log) {
    out += fmt::format("{},{},{},{},{}\n", m.epoch, format_double(m.lr),
                       format_double(m.objective), format_double(m.std_acc),
                       format_double(m.rob_acc));
  }
  return out;
}

}  // namespace arow
