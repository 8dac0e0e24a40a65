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
#include "arow/risk_oracle.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "arow/error.hpp"

namespace arow {

GridBall::GridBall(std::vector<double> center, double epsilon,
                   int points_per_axis, std::optional<std::array<double, 2>> box)
    : center_(std::move(center)), epsilon_(epsilon) {
  if (center_.empty()) throw ConfigError("grid ball: empty center");
  if (epsilon_ < 0.0) throw ConfigError("grid ball: epsilon must be >= 0");
  if (points_per_axis < 2) {
    throw ConfigError(fmt::format("grid ball: points per axis {} < 2",
                                  points_per_axis));
  }
  const double lo = box ? (*box)[0] : 0.0;
  const double hi = box ? (*box)[1] : 0.0;
  if (box) {
    for (double c : center_) {
      if (c < lo || c > hi) {
        throw DomainError(fmt::format(
            "grid ball: center coordinate {} outside box [{}, {}]", c, lo, hi));
      }
    }
  }
  double budget = 1.0;
  for (std::size_t j = 0; j < center_.size(); ++j) {
    budget *= static_cast<double>(points_per_axis);
  }
  if (budget > static_cast<double>(kGridBudget)) {
    throw ResourceError(fmt::format(
        "grid ball: {}^{} lattice exceeds the {} point cap", points_per_axis,
        center_.size(), kGridBudget));
  }

  const std::size_t g = static_cast<std::size_t>(points_per_axis);
  axes_.resize(center_.size());
  center_axis_index_.resize(center_.size());
  for (std::size_t j = 0; j < center_.size(); ++j) {
    std::vector<double>& axis = axes_[j];
    if (epsilon_ == 0.0) {
      axis = {center_[j]};
    } else {
      axis.resize(g);
      for (std::size_t k = 0; k < g; ++k) {
        axis[k] = center_[j] - epsilon_ +
                  2.0 * epsilon_ * static_cast<double>(k) /
                      static_cast<double>(g - 1);
      }
      // The center must be a lattice member exactly; snap the nearest value
      // (the true midpoint when G is odd).
      std::size_t nearest = 0;
      for (std::size_t k = 1; k < g; ++k) {
        if (std::abs(axis[k] - center_[j]) < std::abs(axis[nearest] - center_[j])) {
          nearest = k;
        }
      }
      axis[nearest] = center_[j];
      if (box) {
        std::vector<double> kept;
        for (double v : axis) {
          if (v >= lo && v <= hi) kept.push_back(v);
        }
        axis = std::move(kept);
      }
    }
    const auto it = std::find(axis.begin(), axis.end(), center_[j]);
    if (it == axis.end()) {
      throw Error("grid ball: center dropped from its own lattice");
    }
    center_axis_index_[j] = static_cast<std::size_t>(it - axis.begin());
  }
}

std::size_t GridBall::point_count() const {
  std::size_t n = 1;
  for (const auto& axis : axes_) n *= axis.size();
  return n;
}

std::vector<double> GridBall::points() const {
  const std::size_t d = dim();
  const std::size_t n = point_count();
  std::vector<double> out(n * d);
  std::vector<std::size_t> idx(d, 0);
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t j = 0; j < d; ++j) out[p * d + j] = axes_[j][idx[j]];
    for (std::size_t j = d; j-- > 0;) {  // last axis fastest
      if (++idx[j] < axes_[j].size()) break;
      idx[j] = 0;
    }
  }
  return out;
}

std::size_t GridBall::center_index() const {
  std::size_t index = 0;
  for (std::size_t j = 0; j < dim(); ++j) {
    index = index * axes_[j].size() + center_axis_index_[j];
  }
  return index;
}

namespace {

void check_grid_budget(std::size_t dim, int grid_points) {
  double total = 1.0;
  for (std::size_t j = 0; j < dim; ++j) {
    total *= static_cast<double>(grid_points);
    if (total > static_cast<double>(kGridBudget)) {
      throw ResourceError(fmt::format(
          "grid budget: {}^{} exceeds the {} point cap", grid_points, dim,
          kGridBudget));
    }
  }
}

struct GridScan {
  std::vector<int> preds;     ///< prediction at every lattice point
  int pred_center = 0;
  std::size_t first_flip = 0;  ///< scan index, == npoints when none
  std::size_t npoints = 0;
};

GridScan scan_ball(const ModelParams& model, const GridBall& ball) {
  GridScan s;
  const auto pts = ball.points();
  s.npoints = ball.point_count();
  s.preds = predict(model, pts.data(), s.npoints);
  s.pred_center = s.preds[ball.center_index()];
  s.first_flip = s.npoints;
  for (std::size_t p = 0; p < s.npoints; ++p) {
    if (s.preds[p] != s.pred_center) {
      s.first_flip = p;
      break;
    }
  }
  return s;
}

}  // namespace

std::vector<double> worst_case_z(const ModelParams& model, const GridBall& ball) {
  const GridScan s = scan_ball(model, ball);
  if (s.first_flip == s.npoints) return ball.center();
  const auto pts = ball.points();
  const std::size_t d = ball.dim();
  return std::vector<double>(pts.begin() + s.first_flip * d,
                             pts.begin() + (s.first_flip + 1) * d);
}

RiskReport empirical_risks(const ModelParams& model, const Dataset& data,
                           double epsilon, int grid_points,
                           std::optional<std::array<double, 2>> box) {
  data.validate();
  if (data.dim != model.spec.input_dim) {
    throw ShapeError(fmt::format("risk oracle: data dim {} vs model dim {}",
                                 data.dim, model.spec.input_dim));
  }
  check_grid_budget(data.dim, grid_points);

  RiskReport report;
  report.n = data.size();
  report.epsilon = epsilon;
  report.grid_points = grid_points;

  std::size_t robust_count = 0, natural_count = 0, boundary_count = 0;
  std::size_t t1_rhs_count = 0;  // integer numerator of the indicator part
  double t2_rhs_sum = 0.0;
  bool lemma2_all = true;

  for (std::size_t i = 0; i < data.size(); ++i) {
    const double* xi = data.row(i);
    const int yi = data.labels[i];
    GridBall ball(std::vector<double>(xi, xi + data.dim), epsilon, grid_points,
                  box);
    const GridScan scan = scan_ball(model, ball);
    const auto pts = ball.points();

    SampleBoundRecord rec;
    rec.label = yi;
    rec.pred_clean = scan.pred_center;
    rec.natural_err = scan.pred_center != yi;
    bool any_misclassified = false;
    for (std::size_t p = 0; p < scan.npoints; ++p) {
      if (scan.preds[p] != yi) {
        any_misclassified = true;
        break;
      }
    }
    rec.robust_err = any_misclassified;
    const bool any_flip = scan.first_flip != scan.npoints;
    rec.boundary_err = !rec.natural_err && any_flip;

    // z on the same grid: first flipped point in scan order, else center.
    std::size_t z_index = any_flip ? scan.first_flip : ball.center_index();
    rec.z.assign(pts.begin() + z_index * data.dim,
                 pts.begin() + (z_index + 1) * data.dim);
    rec.pred_z = scan.preds[z_index];
    rec.flip_z = rec.pred_z != scan.pred_center;

    const auto probs_z = class_probs(model, rec.z.data(), 1);
    rec.p_y_given_z = probs_z[static_cast<std::size_t>(yi)];
    rec.max_prob_z = *std::max_element(probs_z.begin(), probs_z.end());
    const auto probs_x = class_probs(model, xi, 1);
    rec.p_y_given_x = probs_x[static_cast<std::size_t>(yi)];

    rec.theorem1_rhs = (rec.natural_err ? 1 : 0) +
                       ((rec.flip_z && rec.p_y_given_z < 0.5) ? 1 : 0);
    rec.theorem2_rhs =
        (rec.natural_err ? 1.0 : 0.0) +
        (rec.flip_z ? 2.0 * rec.p_y_given_x : 0.0);

    rec.lemma2_lhs = any_flip && !rec.natural_err;
    rec.lemma2_rhs = rec.flip_z && (rec.pred_z != yi);
    if (rec.lemma2_lhs && !rec.lemma2_rhs) lemma2_all = false;

    robust_count += rec.robust_err ? 1 : 0;
    natural_count += rec.natural_err ? 1 : 0;
    boundary_count += rec.boundary_err ? 1 : 0;
    t1_rhs_count += static_cast<std::size_t>(rec.theorem1_rhs);
    t2_rhs_sum += rec.theorem2_rhs;
    report.samples.push_back(std::move(rec));
  }

  const double n = static_cast<double>(report.n);
  report.robust_risk = static_cast<double>(robust_count) / n;
  report.natural_risk = static_cast<double>(natural_count) / n;
  report.boundary_risk = static_cast<double>(boundary_count) / n;
  report.theorem1_rhs = static_cast<double>(t1_rhs_count) / n;
  report.theorem2_rhs = t2_rhs_sum / n;
  report.decomposition_exact =
      robust_count == natural_count + boundary_count;
  report.theorem1_holds = report.robust_risk <= report.theorem1_rhs + kBoundSlack;
  report.theorem2_holds = report.robust_risk <= report.theorem2_rhs + kBoundSlack;
  report.lemma2_holds = lemma2_all;
  return report;
}

BoundCheck theorem1_check(const RiskReport& report) {
  return {report.robust_risk, report.theorem1_rhs, report.theorem1_holds};
}

BoundCheck theorem2_check(const RiskReport& report) {
  return {report.robust_risk, report.theorem2_rhs, report.theorem2_holds};
}

Lemma2Check lemma2_check(const ModelParams& model, const std::vector<double>& x,
                         int y, double epsilon, int grid_points,
                         std::optional<std::array<double, 2>> box) {
  Dataset one;
  one.dim = x.size();
  one.classes = model.spec.classes;
  one.inputs = x;
  one.labels = {y};
  one.provenance = "lemma2_check";
  const RiskReport r = empirical_risks(model, one, epsilon, grid_points, box);
  const auto& rec = r.samples.front();
  Lemma2Check out;
  out.lhs = rec.lemma2_lhs;
  out.rhs = rec.lemma2_rhs;
  out.holds = !out.lhs || out.rhs;
  return out;
}

std::string RiskReport::to_text() const {
  std::string s;
  s += fmt::format("samples={} epsilon={} grid_points={}\n", n, epsilon,
                   grid_points);
  s += fmt::format("robust_risk={}\n", robust_risk);
  s += fmt::format("natural_risk={}\n", natural_risk);
  s += fmt::format("boundary_risk={}\n", boundary_risk);
  s += fmt::format("decomposition_exact={}\n", decomposition_exact ? "yes" : "no");
  s += fmt::format("theorem1_rhs={} holds={}\n", theorem1_rhs,
                   theorem1_holds ? "yes" : "no");
  s += fmt::format("theorem2_rhs={} holds={}\n", theorem2_rhs,
                   theorem2_holds ? "yes" : "no");
  s += fmt::format("lemma2_holds={}\n", lemma2_holds ? "yes" : "no");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& r = samples[i];
    std::string zc;
    for (std::size_t j = 0; j < r.z.size(); ++j) {
      zc += (j ? "," : "") + fmt::format("{}", r.z[j]);
    }
    s += fmt::format(
        "sample {}: y={} pred={} z=({}) pred_z={} p_y_z={} p_y_x={} nat={} "
        "bdy={} rob={} t1_rhs={} t2_rhs={} lemma2={}|{}\n",
        i, r.label, r.pred_clean, zc, r.pred_z, r.p_y_given_z, r.p_y_given_x,
        r.natural_err ? 1 : 0, r.boundary_err ? 1 : 0, r.robust_err ? 1 : 0,
        r.theorem1_rhs, r.theorem2_rhs, r.lemma2_lhs ? 1 : 0,
        r.lemma2_rhs ? 1 : 0);
  }
  return s;
}

}  // namespace arow
