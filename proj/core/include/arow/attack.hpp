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

#include <array>
#include <optional>
#include <random>
#include <vector>

#include "arow/model.hpp"

namespace arow {

/// Surrogate loss maximized by the attack.
enum class Surrogate {
  kCrossEntropy,  ///< ce(f(x'), y)
  kKlToClean,     ///< KL(p(.|x) || p(.|x'))
};

struct AttackConfig {
  double epsilon = 0.0;  ///< L-inf radius, input units
  double eta = 0.0;      ///< step size, input units
  int steps = 0;
  Surrogate surrogate = Surrogate::kCrossEntropy;
  bool random_init = true;
  std::optional<std::array<double, 2>> clamp_box;  ///< per-coordinate (lo, hi)

  void validate() const;
};

/// Per-row iteration trace. Step indices are 1-based for post-update
/// predictions; index 0 is the initialization point.
struct PgdTrace {
  int initial_pred = -1;
  std::vector<int> step_preds;       ///< length == steps
  std::optional<int> first_flip;     ///< minimal index with pred != label
};

struct AttackOutput {
  std::vector<double> x_adv;  ///< B x d
  std::vector<PgdTrace> traces;
};

/// Sign-gradient ascent with projection onto the L-inf ball around each
/// row of `x`, then onto the clamp box. Parameters are read-only.
AttackOutput pgd_attack(const ModelParams& model, const std::vector<double>& x,
                        const std::vector<int>& y, std::size_t batch,
                        const AttackConfig& cfg, std::mt19937_64& rng);

/// PGD where row i stops after min(first_flip_i + overshoot, steps) updates;
/// rows that never flip run the full budget.
std::vector<double> early_stopped_pgd(const ModelParams& model,
                                      const std::vector<double>& x,
                                      const std::vector<int>& y,
                                      std::size_t batch, const AttackConfig& cfg,
                                      int overshoot_steps, std::mt19937_64& rng);

/// kappa = min(first flip step, steps); steps if the trace never flips.
int gair_kappa(const PgdTrace& trace, int steps);

}  // namespace arow
