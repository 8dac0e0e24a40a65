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

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "arow/model.hpp"

namespace arow::testutil {

/// Independent gradient oracle: central finite differences of a scalar
/// function, elementwise over the input vector.
inline std::vector<double> finite_diff(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> x, double h = 1e-5) {
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = f(x);
    x[i] = keep - h;
    const double down = f(x);
    x[i] = keep;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

/// Max over entries of |a - b| / max(|b|, floor); entries with both sides
/// below `atol` are treated as matching (near-zero regime).
inline double max_rel_err(const std::vector<double>& a,
                          const std::vector<double>& b, double atol = 1e-7) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = std::abs(a[i] - b[i]);
    if (std::abs(a[i]) < atol && std::abs(b[i]) < atol) continue;
    worst = std::max(worst, diff / std::max(std::abs(b[i]), atol));
  }
  return worst;
}

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n,
                                         double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = dist(rng);
  return v;
}

inline std::vector<int> random_labels(std::mt19937_64& rng, std::size_t n,
                                      std::size_t classes) {
  std::vector<int> y(n);
  for (int& v : y) v = static_cast<int>(rng() % classes);
  return y;
}

inline ModelParams random_model(std::mt19937_64& rng, std::size_t input_dim,
                                std::vector<std::size_t> hidden,
                                std::size_t classes) {
  MlpSpec spec;
  spec.input_dim = input_dim;
  spec.hidden = std::move(hidden);
  spec.classes = classes;
  spec.seed = rng();
  return init_params(spec);
}

/// Row-major distribution rows that are strictly positive and sum to 1.
inline std::vector<double> random_distributions(std::mt19937_64& rng,
                                                std::size_t rows,
                                                std::size_t cols) {
  std::uniform_real_distribution<double> dist(0.05, 1.0);
  std::vector<double> p(rows * cols);
  for (std::size_t i = 0; i < rows; ++i) {
    double z = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      p[i * cols + j] = dist(rng);
      z += p[i * cols + j];
    }
    for (std::size_t j = 0; j < cols; ++j) p[i * cols + j] /= z;
  }
  return p;
}

}  // namespace arow::testutil
