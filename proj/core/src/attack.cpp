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
#include "arow/attack.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "arow/error.hpp"

namespace arow {

void AttackConfig::validate() const {
  if (epsilon < 0.0) throw ConfigError("attack: epsilon must be >= 0");
  if (steps < 0) throw ConfigError("attack: steps must be >= 0");
  if (steps > 0 && !(eta > 0.0)) {
    throw ConfigError("attack: eta must be > 0 when steps > 0");
  }
  if (clamp_box && !((*clamp_box)[0] <= (*clamp_box)[1])) {
    throw ConfigError(fmt::format("attack: clamp box [{}, {}] is inverted",
                                  (*clamp_box)[0], (*clamp_box)[1]));
  }
}

namespace {

double sign0(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

std::vector<int> argmax_rows(const std::vector<double>& logits, std::size_t b,
                             std::size_t c) {
  std::vector<int> preds(b);
  for (std::size_t i = 0; i < b; ++i) {
    preds[i] = argmax_row(logits.data() + i * c, c);
  }
  return preds;
}

// One PGD run; rows freeze once they have taken `stop_at[i]` updates
// (stop_at empty means no early stopping).
AttackOutput run_pgd(const ModelParams& model, const std::vector<double>& x,
                     const std::vector<int>& y, std::size_t batch,
                     const AttackConfig& cfg, std::optional<int> overshoot,
                     std::mt19937_64& rng) {
  cfg.validate();
  const std::size_t d = model.spec.input_dim;
  const std::size_t c = model.spec.classes;
  if (x.size() != batch * d) {
    throw ShapeError(fmt::format("pgd_attack: {} values for batch {} of dim {}",
                                 x.size(), batch, d));
  }
  if (y.size() != batch) {
    throw ShapeError(fmt::format("pgd_attack: {} labels for batch {}", y.size(), batch));
  }
  for (std::size_t i = 0; i < batch; ++i) {
    if (y[i] < 0 || static_cast<std::size_t>(y[i]) >= c) {
      throw DomainError(fmt::format("pgd_attack: label {} at row {}", y[i], i));
    }
  }

  const double lo = cfg.clamp_box ? (*cfg.clamp_box)[0] : 0.0;
  const double hi = cfg.clamp_box ? (*cfg.clamp_box)[1] : 0.0;
  auto box = [&](double v) {
    return cfg.clamp_box ? std::min(std::max(v, lo), hi) : v;
  };

  AttackOutput out;
  out.traces.assign(batch, PgdTrace{});

  // Degenerate ball: nothing can move; keep x bit-for-bit.
  if (cfg.epsilon == 0.0) {
    out.x_adv = x;
    const auto preds = argmax_rows(forward_logits(model, x.data(), batch), batch, c);
    for (std::size_t i = 0; i < batch; ++i) {
      out.traces[i].initial_pred = preds[i];
      out.traces[i].step_preds.assign(cfg.steps, preds[i]);
      if (preds[i] != y[i]) out.traces[i].first_flip = 0;
    }
    return out;
  }

  std::vector<double> cur(batch * d);
  if (cfg.random_init) {
    std::uniform_real_distribution<double> uni(-cfg.epsilon, cfg.epsilon);
    for (std::size_t i = 0; i < batch * d; ++i) cur[i] = box(x[i] + uni(rng));
  } else {
    cur = x;
  }

  // Clean-point reference distribution for the KL surrogate, fixed for the
  // whole attack.
  Tensor p_clean, lp_clean;
  if (cfg.surrogate == Surrogate::kKlToClean && cfg.steps > 0) {
    Tensor clean_logits({batch, c}, forward_logits(model, x.data(), batch));
    lp_clean = log_softmax(clean_logits);
    p_clean = exp(lp_clean);
  }

  const TapedMlp frozen = lift_frozen(model);
  std::vector<int> updates_done(batch, 0);
  std::vector<int> stop_at(batch, cfg.steps);
  const int total_steps = cfg.steps;

  auto note_preds = [&](int step_index, const std::vector<int>& preds) {
    for (std::size_t i = 0; i < batch; ++i) {
      PgdTrace& tr = out.traces[i];
      if (step_index == 0) {
        tr.initial_pred = preds[i];
      } else {
        tr.step_preds[step_index - 1] = preds[i];
      }
      if (!tr.first_flip && preds[i] != y[i]) {
        tr.first_flip = step_index;
        if (overshoot) {
          stop_at[i] = std::min(step_index + *overshoot, total_steps);
        }
      }
    }
  };

  for (auto& tr : out.traces) tr.step_preds.assign(cfg.steps, -1);

  for (int m = 0; m < cfg.steps; ++m) {
    bool any_live = false;
    for (std::size_t i = 0; i < batch; ++i) {
      if (updates_done[i] < stop_at[i]) {
        any_live = true;
        break;
      }
    }
    if (!any_live) break;  // every row frozen (early-stopped variant)

    Tape tape;
    Tensor xt = tape.var({batch, d}, cur);
    Tensor logits = mlp_forward(frozen, xt);
    note_preds(m, argmax_rows(logits.data(), batch, c));

    Tensor loss;
    if (cfg.surrogate == Surrogate::kCrossEntropy) {
      loss = scale(sum(select_cols(log_softmax(logits), y)), -1.0);
    } else {
      loss = sum(mul(p_clean, sub(lp_clean, log_softmax(logits))));
    }
    const Gradients grads = tape.backward(loss);
    const std::vector<double>& g = grads.at(xt);
    for (std::size_t i = 0; i < batch; ++i) {
      const int applied = updates_done[i];
      if (applied >= stop_at[i]) continue;  // frozen row
      for (std::size_t j = 0; j < d; ++j) {
        const double gv = g[i * d + j];
        if (!std::isfinite(gv)) {
          throw AttackError(fmt::format(
              "pgd_attack: non-finite gradient at batch row {}, step {}", i, m + 1));
        }
        const double proposed = cur[i * d + j] + cfg.eta * sign0(gv);
        const double delta = std::min(std::max(proposed - x[i * d + j], -cfg.epsilon),
                                      cfg.epsilon);
        cur[i * d + j] = box(x[i * d + j] + delta);
      }
      updates_done[i] = applied + 1;
    }
  }

  // Predictions at the final iterate (or at the init point when steps == 0).
  const auto preds = argmax_rows(forward_logits(model, cur.data(), batch), batch, c);
  note_preds(cfg.steps, preds);

  // Frozen rows keep stale -1 in later slots; refill with their settled
  // prediction so traces stay aligned with the step budget.
  for (std::size_t i = 0; i < batch; ++i) {
    PgdTrace& tr = out.traces[i];
    for (int m = 0; m < cfg.steps; ++m) {
      if (tr.step_preds[m] == -1) tr.step_preds[m] = preds[i];
    }
  }

  out.x_adv = std::move(cur);
  return out;
}

}  // namespace

AttackOutput pgd_attack(const ModelParams& model, const std::vector<double>& x,
                        const std::vector<int>& y, std::size_t batch,
                        const AttackConfig& cfg, std::mt19937_64& rng) {
  return run_pgd(model, x, y, batch, cfg, std::nullopt, rng);
}

std::vector<double> early_stopped_pgd(const ModelParams& model,
                                      const std::vector<double>& x,
                                      const std::vector<int>& y,
                                      std::size_t batch, const AttackConfig& cfg,
                                      int overshoot_steps, std::mt19937_64& rng) {
  if (overshoot_steps < 0 || overshoot_steps > cfg.steps) {
    throw ConfigError(fmt::format(
        "early_stopped_pgd: overshoot {} outside [0, {}]", overshoot_steps,
        cfg.steps));
  }
  return run_pgd(model, x, y, batch, cfg, overshoot_steps, rng).x_adv;
}

int gair_kappa(const PgdTrace& trace, int steps) {
  if (static_cast<int>(trace.step_preds.size()) != steps) {
    throw ShapeError(fmt::format(
        "gair_kappa: trace has {} steps, attack ran {}", trace.step_preds.size(),
        steps));
  }
  if (!trace.first_flip) return steps;
  return std::min(*trace.first_flip, steps);
}

}  // namespace arow
