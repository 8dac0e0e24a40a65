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
#include <string>
#include <vector>

#include "arow/data.hpp"
#include "arow/model.hpp"

namespace arow {

/// Discretized L-inf ball: the G^d lattice over prod_j [x_j - eps, x_j + eps]
/// intersected with the box, with the center always present exactly. Points
/// enumerate in row-major order over per-axis indices (last axis fastest),
/// which fixes the canonical scan order.
class GridBall {
 public:
  GridBall(std::vector<double> center, double epsilon, int points_per_axis,
           std::optional<std::array<double, 2>> box);

  const std::vector<double>& center() const { return center_; }
  double epsilon() const { return epsilon_; }
  std::size_t dim() const { return center_.size(); }
  const std::vector<std::vector<double>>& axes() const { return axes_; }
  std::size_t point_count() const;

  /// All points materialized as a point_count x dim matrix in scan order.
  std::vector<double> points() const;

  /// Scan-order index of the center.
  std::size_t center_index() const;

 private:
  std::vector<double> center_;
  double epsilon_;
  std::vector<std::vector<double>> axes_;
  std::vector<std::size_t> center_axis_index_;
};

/// Hard cap on lattice evaluations per sample: G^d must stay <= this.
inline constexpr std::size_t kGridBudget = 10'000'000;

/// First scanned lattice point whose prediction differs from the center's;
/// the center itself when no flip exists.
std::vector<double> worst_case_z(const ModelParams& model, const GridBall& ball);

struct SampleBoundRecord {
  int label = 0;
  int pred_clean = 0;
  std::vector<double> z;
  int pred_z = 0;
  double p_y_given_z = 0.0;
  double p_y_given_x = 0.0;
  double max_prob_z = 0.0;       ///< for the binary tie audit
  bool natural_err = false;      ///< F(x) != y
  bool boundary_err = false;     ///< F(x) == y and some grid point flips
  bool robust_err = false;       ///< some grid point misclassified
  bool flip_z = false;           ///< F(x) != F(z)
  int theorem1_rhs = 0;          ///< in {0, 1, 2}
  double theorem2_rhs = 0.0;
  bool lemma2_lhs = false;
  bool lemma2_rhs = false;
};

struct RiskReport {
  std::size_t n = 0;
  double epsilon = 0.0;
  int grid_points = 0;
  double robust_risk = 0.0;
  double natural_risk = 0.0;
  double boundary_risk = 0.0;
  double theorem1_rhs = 0.0;
  double theorem2_rhs = 0.0;
  bool theorem1_holds = false;
  bool theorem2_holds = false;
  bool lemma2_holds = false;          ///< per-sample inequality, all rows
  bool decomposition_exact = false;   ///< integer-count identity
  std::vector<SampleBoundRecord> samples;

  std::string to_text() const;  ///< aggregates plus one record per sample
};

/// Grid-restricted risks and executable bound checks, all counted on the
/// same enumeration (worst_case_z included).
RiskReport empirical_risks(const ModelParams& model, const Dataset& data,
                           double epsilon, int grid_points,
                           std::optional<std::array<double, 2>> box);

struct BoundCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

BoundCheck theorem1_check(const RiskReport& report);
BoundCheck theorem2_check(const RiskReport& report);

struct Lemma2Check {
  bool lhs = false;
  bool rhs = false;
  bool holds = false;
};

/// Both indicator sides of the key per-sample inequality, on the grid.
Lemma2Check lemma2_check(const ModelParams& model, const std::vector<double>& x,
                         int y, double epsilon, int grid_points,
                         std::optional<std::array<double, 2>> box);

inline constexpr double kBoundSlack = 1e-12;
inline constexpr double kTieTolerance = 1e-9;

}  // namespace arow
