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

#include <optional>
#include <string>
#include <vector>

#include "arow/attack.hpp"
#include "arow/model.hpp"

namespace arow {

enum class ObjectiveKind {
  kNatural,
  kPgdAt,
  kGairAt,
  kTrades,
  kHat,
  kMart,
  kArow,
  kCow,
};

const char* objective_kind_name(ObjectiveKind kind);
ObjectiveKind objective_kind_from_name(const std::string& name);

struct ObjectiveSpec {
  ObjectiveKind kind = ObjectiveKind::kNatural;
  double lambda = 1.0;       ///< regularization weight, >= 0
  double alpha = 0.0;        ///< label-smoothing mass, [0, 1)
  double gamma = 0.0;        ///< HAT helper weight, >= 0
  bool detach_weight = false;  ///< freeze the ARoW/CoW/MART weight factor
  std::optional<std::string> pretrained;  ///< checkpoint path (HAT only)

  void validate() const;
  bool needs_attack() const { return kind != ObjectiveKind::kNatural; }
  bool needs_traces() const { return kind == ObjectiveKind::kGairAt; }
};

// ---------------------------------------------------------------------------
// Building blocks. All losses reduce over the batch by mean.
// ---------------------------------------------------------------------------

/// Mean over the batch of -log p(y | x).
Tensor ce_loss(const Tensor& logits, const std::vector<int>& y);

/// Label-smoothing cross-entropy with target (1-alpha) one-hot + alpha/C.
Tensor ls_ce_loss(const Tensor& logits, const std::vector<int>& y, double alpha);

/// Per-row KL(softmax(p_logits) || softmax(q_logits)), differentiable
/// through both arguments.
Tensor kl_rows(const Tensor& p_logits, const Tensor& q_logits);

/// Value-only KL between explicit distributions, 0 log 0 = 0.
struct KlResult {
  std::vector<double> per_row;
  double mean = 0.0;
};
KlResult kl_div(const std::vector<double>& p, const std::vector<double>& q,
                std::size_t rows, std::size_t cols);

/// (1 + tanh(5 (1 - 2 kappa / steps))) / 2, decreasing in kappa.
double gair_weight(int kappa, int steps);

// ---------------------------------------------------------------------------
// Composite objectives. The adversarial points are constants: nothing
// differentiates back through the attack.
// ---------------------------------------------------------------------------

Tensor pgd_at_objective(const TapedMlp& model, const Tensor& x_adv,
                        const std::vector<int>& y);

Tensor gair_at_objective(const TapedMlp& model, const Tensor& x_adv,
                         const std::vector<int>& y,
                         const std::vector<PgdTrace>& traces, int steps);

Tensor trades_objective(const TapedMlp& model, const Tensor& x,
                        const Tensor& x_adv, const std::vector<int>& y,
                        double lambda);

/// `fixed_weight` replaces the per-row weight factor with a constant; it is
/// a diagnostic seam (a fixed weight of 1/2 reduces both to TRADES).
Tensor arow_objective(const TapedMlp& model, const Tensor& x, const Tensor& x_adv,
                      const std::vector<int>& y, double lambda, double alpha,
                      bool detach_weight,
                      std::optional<double> fixed_weight = std::nullopt);

Tensor cow_objective(const TapedMlp& model, const Tensor& x, const Tensor& x_adv,
                     const std::vector<int>& y, double lambda, double alpha,
                     bool detach_weight,
                     std::optional<double> fixed_weight = std::nullopt);

Tensor mart_objective(const TapedMlp& model, const Tensor& x, const Tensor& x_adv,
                      const std::vector<int>& y, double lambda,
                      bool detach_weight);

Tensor hat_objective(const TapedMlp& model, const ModelParams& pretrained,
                     const Tensor& x, const Tensor& x_adv,
                     const std::vector<int>& y, double lambda, double gamma,
                     std::optional<std::array<double, 2>> helper_box);

/// Dispatch on spec.kind. `pretrained` is required for HAT, `traces` and
/// `attack_steps` for GAIR-AT.
Tensor objective_loss(const TapedMlp& model, const ObjectiveSpec& spec,
                      const Tensor& x, const Tensor& x_adv,
                      const std::vector<int>& y,
                      const std::vector<PgdTrace>* traces, int attack_steps,
                      const ModelParams* pretrained,
                      std::optional<std::array<double, 2>> box);

}  // namespace arow
