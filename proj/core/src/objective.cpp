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
#include "arow/objective.hpp"

#include <cmath>

#include <fmt/format.h>

#include "arow/error.hpp"

namespace arow {

const char* objective_kind_name(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::kNatural: return "natural";
    case ObjectiveKind::kPgdAt: return "pgd-at";
    case ObjectiveKind::kGairAt: return "gair-at";
    case ObjectiveKind::kTrades: return "trades";
    case ObjectiveKind::kHat: return "hat";
    case ObjectiveKind::kMart: return "mart";
    case ObjectiveKind::kArow: return "arow";
    case ObjectiveKind::kCow: return "cow";
  }
  throw Error("objective_kind_name: unhandled kind");
}

ObjectiveKind objective_kind_from_name(const std::string& name) {
  for (ObjectiveKind k :
       {ObjectiveKind::kNatural, ObjectiveKind::kPgdAt, ObjectiveKind::kGairAt,
        ObjectiveKind::kTrades, ObjectiveKind::kHat, ObjectiveKind::kMart,
        ObjectiveKind::kArow, ObjectiveKind::kCow}) {
    if (name == objective_kind_name(k)) return k;
  }
  throw ConfigError(fmt::format("objective: unknown kind '{}'", name));
}

void ObjectiveSpec::validate() const {
  if (lambda < 0.0) throw ConfigError("objective: lambda must be >= 0");
  if (alpha < 0.0 || alpha >= 1.0) {
    throw ConfigError(fmt::format("objective: alpha {} outside [0, 1)", alpha));
  }
  if (gamma < 0.0) throw ConfigError("objective: gamma must be >= 0");
  if (kind == ObjectiveKind::kHat && !pretrained) {
    throw ConfigError("objective: hat requires a pretrained checkpoint");
  }
}

namespace {

void check_labels(const Tensor& logits, const std::vector<int>& y) {
  if (logits.rows() != y.size()) {
    throw ShapeError(fmt::format("loss: {} labels for {} logit rows", y.size(),
                                 logits.rows()));
  }
}

}  // namespace

Tensor ce_loss(const Tensor& logits, const std::vector<int>& y) {
  check_labels(logits, y);
  return scale(mean(select_cols(log_softmax(logits), y)), -1.0);
}

Tensor ls_ce_loss(const Tensor& logits, const std::vector<int>& y, double alpha) {
  check_labels(logits, y);
  if (alpha < 0.0 || alpha >= 1.0) {
    throw ConfigError(fmt::format("ls_ce_loss: alpha {} outside [0, 1)", alpha));
  }
  if (alpha == 0.0) return ce_loss(logits, y);
  const std::size_t b = logits.rows(), c = logits.cols();
  std::vector<double> target(b * c, alpha / static_cast<double>(c));
  for (std::size_t i = 0; i < b; ++i) {
    target[i * c + y[i]] += 1.0 - alpha;
  }
  Tensor t({b, c}, std::move(target));
  return scale(mean(row_sum(mul(t, log_softmax(logits)))), -1.0);
}

Tensor kl_rows(const Tensor& p_logits, const Tensor& q_logits) {
  if (p_logits.shape() != q_logits.shape()) {
    throw ShapeError("kl_rows: logit shapes differ");
  }
  Tensor lp = log_softmax(p_logits);
  Tensor lq = log_softmax(q_logits);
  return row_sum(mul(exp(lp), sub(lp, lq)));
}

KlResult kl_div(const std::vector<double>& p, const std::vector<double>& q,
                std::size_t rows, std::size_t cols) {
  if (p.size() != rows * cols || q.size() != rows * cols) {
    throw ShapeError(fmt::format("kl_div: sizes {}, {} for {}x{}", p.size(),
                                 q.size(), rows, cols));
  }
  KlResult r;
  r.per_row.assign(rows, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      const double pv = p[i * cols + j];
      if (pv == 0.0) continue;  // 0 log 0 = 0
      if (pv < 0.0) {
        throw DomainError(fmt::format("kl_div: negative mass {} at row {}", pv, i));
      }
      acc += pv * (std::log(pv) - std::log(q[i * cols + j]));
    }
    r.per_row[i] = acc;
    r.mean += acc;
  }
  r.mean /= static_cast<double>(rows);
  return r;
}

double gair_weight(int kappa, int steps) {
  if (steps < 1) throw DomainError("gair_weight: steps must be >= 1");
  if (kappa < 0 || kappa > steps) {
    throw DomainError(fmt::format("gair_weight: kappa {} outside [0, {}]",
                                  kappa, steps));
  }
  const double r = static_cast<double>(kappa) / static_cast<double>(steps);
  return (1.0 + std::tanh(5.0 * (1.0 - 2.0 * r))) / 2.0;
}

Tensor pgd_at_objective(const TapedMlp& model, const Tensor& x_adv,
                        const std::vector<int>& y) {
  return ce_loss(mlp_forward(model, x_adv), y);
}

Tensor gair_at_objective(const TapedMlp& model, const Tensor& x_adv,
                         const std::vector<int>& y,
                         const std::vector<PgdTrace>& traces, int steps) {
  if (traces.size() != y.size()) {
    throw ShapeError(fmt::format("gair_at: {} traces for {} rows", traces.size(),
                                 y.size()));
  }
  std::vector<double> w(traces.size());
  for (std::size_t i = 0; i < traces.size(); ++i) {
    w[i] = gair_weight(gair_kappa(traces[i], steps), steps);
  }
  Tensor weights({traces.size()}, std::move(w));  // constant in differentiation
  Tensor ce_rows = scale(select_cols(log_softmax(mlp_forward(model, x_adv)), y),
                         -1.0);
  return mean(mul(weights, ce_rows));
}

Tensor trades_objective(const TapedMlp& model, const Tensor& x,
                        const Tensor& x_adv, const std::vector<int>& y,
                        double lambda) {
  Tensor logits_clean = mlp_forward(model, x);
  Tensor logits_adv = mlp_forward(model, x_adv);
  return add(ce_loss(logits_clean, y),
             scale(mean(kl_rows(logits_clean, logits_adv)), lambda));
}

namespace {

// Shared core of ARoW and CoW: label-smoothed CE plus 2 lambda KL weighted
// per row; only the weight factor differs.
Tensor weighted_kl_objective(const TapedMlp& model, const Tensor& x,
                             const Tensor& x_adv, const std::vector<int>& y,
                             double lambda, double alpha, bool detach_weight,
                             bool weight_on_adv,
                             std::optional<double> fixed_weight) {
  Tensor logits_clean = mlp_forward(model, x);
  Tensor logits_adv = mlp_forward(model, x_adv);
  Tensor weight;
  if (fixed_weight) {
    weight = Tensor({y.size()}, std::vector<double>(y.size(), *fixed_weight));
  } else if (weight_on_adv) {
    // 1 - p(y | x_adv): large where the attack succeeds
    weight = rsub_const(1.0, select_cols(exp(log_softmax(logits_adv)), y));
  } else {
    // p(y | x): clean-confidence weighting
    weight = select_cols(exp(log_softmax(logits_clean)), y);
  }
  if (detach_weight) weight = detach(weight);
  Tensor reg = mean(mul(kl_rows(logits_clean, logits_adv), weight));
  return add(ls_ce_loss(logits_clean, y, alpha), scale(reg, 2.0 * lambda));
}

}  // namespace

Tensor arow_objective(const TapedMlp& model, const Tensor& x, const Tensor& x_adv,
                      const std::vector<int>& y, double lambda, double alpha,
                      bool detach_weight, std::optional<double> fixed_weight) {
  return weighted_kl_objective(model, x, x_adv, y, lambda, alpha, detach_weight,
                               /*weight_on_adv=*/true, fixed_weight);
}

Tensor cow_objective(const TapedMlp& model, const Tensor& x, const Tensor& x_adv,
                     const std::vector<int>& y, double lambda, double alpha,
                     bool detach_weight, std::optional<double> fixed_weight) {
  return weighted_kl_objective(model, x, x_adv, y, lambda, alpha, detach_weight,
                               /*weight_on_adv=*/false, fixed_weight);
}

Tensor mart_objective(const TapedMlp& model, const Tensor& x, const Tensor& x_adv,
                      const std::vector<int>& y, double lambda,
                      bool detach_weight) {
  Tensor logits_clean = mlp_forward(model, x);
  Tensor logits_adv = mlp_forward(model, x_adv);
  Tensor lp_adv = log_softmax(logits_adv);
  Tensor p_adv = exp(lp_adv);

  // Hard max over k != y, lowest index on ties; gradient reaches the
  // winning entry only.
  const std::size_t b = p_adv.rows(), c = p_adv.cols();
  const auto& pv = p_adv.data();
  std::vector<int> winner(b);
  for (std::size_t i = 0; i < b; ++i) {
    int best = -1;
    for (std::size_t k = 0; k < c; ++k) {
      if (static_cast<int>(k) == y[i]) continue;
      if (best < 0 || pv[i * c + k] > pv[i * c + best]) {
        best = static_cast<int>(k);
      }
    }
    winner[i] = best;
  }

  Tensor margin = add(scale(mean(select_cols(lp_adv, y)), -1.0),
                      scale(mean(log(rsub_const(1.0, select_cols(p_adv, winner)))),
                            -1.0));
  Tensor weight = rsub_const(1.0, select_cols(exp(log_softmax(logits_clean)), y));
  if (detach_weight) weight = detach(weight);
  Tensor reg = mean(mul(kl_rows(logits_clean, logits_adv), weight));
  return add(margin, scale(reg, lambda));
}

Tensor hat_objective(const TapedMlp& model, const ModelParams& pretrained,
                     const Tensor& x, const Tensor& x_adv,
                     const std::vector<int>& y, double lambda, double gamma,
                     std::optional<std::array<double, 2>> helper_box) {
  if (x.shape() != x_adv.shape()) {
    throw ShapeError("hat: x and x_adv shapes differ");
  }
  const std::size_t b = x.rows(), d = x.cols();
  if (pretrained.spec.input_dim != d) {
    throw ConfigError(fmt::format(
        "hat: pretrained model expects input dim {}, batch has {}",
        pretrained.spec.input_dim, d));
  }

  // Helper points x + 2 (x_adv - x), extrapolating past the attack.
  const auto& xv = x.data();
  const auto& av = x_adv.data();
  std::vector<double> helper(b * d);
  for (std::size_t i = 0; i < b * d; ++i) {
    double v = xv[i] + 2.0 * (av[i] - xv[i]);
    if (helper_box) v = std::min(std::max(v, (*helper_box)[0]), (*helper_box)[1]);
    helper[i] = v;
  }
  const std::vector<int> helper_labels =
      predict(pretrained, av.data(), b);  // hard labels, no gradient

  Tensor logits_clean = mlp_forward(model, x);
  Tensor logits_adv = mlp_forward(model, x_adv);
  Tensor logits_helper = mlp_forward(model, Tensor({b, d}, std::move(helper)));
  Tensor loss = add(ce_loss(logits_clean, y),
                    scale(mean(kl_rows(logits_clean, logits_adv)), lambda));
  return add(loss, scale(ce_loss(logits_helper, helper_labels), gamma));
}

Tensor objective_loss(const TapedMlp& model, const ObjectiveSpec& spec,
                      const Tensor& x, const Tensor& x_adv,
                      const std::vector<int>& y,
                      const std::vector<PgdTrace>* traces, int attack_steps,
                      const ModelParams* pretrained,
                      std::optional<std::array<double, 2>> box) {
  spec.validate();
  switch (spec.kind) {
    case ObjectiveKind::kNatural:
      return ls_ce_loss(mlp_forward(model, x), y, spec.alpha);
    case ObjectiveKind::kPgdAt:
      return pgd_at_objective(model, x_adv, y);
    case ObjectiveKind::kGairAt:
      if (!traces) throw ConfigError("gair-at: attack traces missing");
      return gair_at_objective(model, x_adv, y, *traces, attack_steps);
    case ObjectiveKind::kTrades:
      return trades_objective(model, x, x_adv, y, spec.lambda);
    case ObjectiveKind::kHat:
      if (!pretrained) throw ConfigError("hat: pretrained model missing");
      return hat_objective(model, *pretrained, x, x_adv, y, spec.lambda,
                           spec.gamma, box);
    case ObjectiveKind::kMart:
      return mart_objective(model, x, x_adv, y, spec.lambda, spec.detach_weight);
    case ObjectiveKind::kArow:
      return arow_objective(model, x, x_adv, y, spec.lambda, spec.alpha,
                            spec.detach_weight);
    case ObjectiveKind::kCow:
      return cow_objective(model, x, x_adv, y, spec.lambda, spec.alpha,
                           spec.detach_weight);
  }
  throw Error("objective_loss: unhandled kind");
}

}  // namespace arow
