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
#include "arow/model.hpp"

#include <cmath>
#include <random>

#include <fmt/format.h>

#include "arow/error.hpp"

namespace arow {

void MlpSpec::validate() const {
  if (input_dim < 1) throw ConfigError("mlp spec: input_dim must be >= 1");
  if (classes < 2) {
    throw ConfigError(fmt::format("mlp spec: classes must be >= 2, got {}", classes));
  }
  for (std::size_t w : hidden) {
    if (w < 1) throw ConfigError("mlp spec: hidden widths must be >= 1");
  }
}

std::vector<std::pair<std::size_t, std::size_t>> MlpSpec::layer_dims() const {
  std::vector<std::pair<std::size_t, std::size_t>> dims;
  std::size_t fan_in = input_dim;
  for (std::size_t w : hidden) {
    dims.emplace_back(fan_in, w);
    fan_in = w;
  }
  dims.emplace_back(fan_in, classes);
  return dims;
}

std::size_t MlpSpec::param_count() const {
  std::size_t n = 0;
  for (auto [fi, fo] : layer_dims()) n += fi * fo + fo;
  return n;
}

bool MlpSpec::same_dims(const MlpSpec& other) const {
  return input_dim == other.input_dim && hidden == other.hidden &&
         classes == other.classes;
}

std::vector<double> ModelParams::flatten() const {
  std::vector<double> flat;
  flat.reserve(spec.param_count());
  for (std::size_t l = 0; l < weights.size(); ++l) {
    flat.insert(flat.end(), weights[l].begin(), weights[l].end());
    flat.insert(flat.end(), biases[l].begin(), biases[l].end());
  }
  return flat;
}

ModelParams ModelParams::unflatten(const MlpSpec& spec,
                                   const std::vector<double>& flat) {
  if (flat.size() != spec.param_count()) {
    throw ShapeError(fmt::format(
        "unflatten: expected {} parameters, got {}", spec.param_count(),
        flat.size()));
  }
  ModelParams p;
  p.spec = spec;
  std::size_t off = 0;
  for (auto [fi, fo] : spec.layer_dims()) {
    p.weights.emplace_back(flat.begin() + off, flat.begin() + off + fi * fo);
    off += fi * fo;
    p.biases.emplace_back(flat.begin() + off, flat.begin() + off + fo);
    off += fo;
  }
  return p;
}

ModelParams init_params(const MlpSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  ModelParams p;
  p.spec = spec;
  for (auto [fi, fo] : spec.layer_dims()) {
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(fi)));
    std::vector<double> w(fi * fo);
    for (double& v : w) v = dist(rng);
    p.weights.push_back(std::move(w));
    p.biases.emplace_back(fo, 0.0);
  }
  return p;
}

namespace {

// x [B x fi] . W [fi x fo] + b, relu between layers, none after the last.
void dense_forward(const ModelParams& p, const double* x, std::size_t batch,
                   std::vector<double>& out) {
  const auto dims = p.spec.layer_dims();
  std::vector<double> cur(x, x + batch * p.spec.input_dim);
  std::vector<double> next;
  for (std::size_t l = 0; l < dims.size(); ++l) {
    const auto [fi, fo] = dims[l];
    next.assign(batch * fo, 0.0);
    const std::vector<double>& W = p.weights[l];
    for (std::size_t i = 0; i < batch; ++i) {
      const double* crow = cur.data() + i * fi;
      double* nrow = next.data() + i * fo;
      for (std::size_t kk = 0; kk < fi; ++kk) {
        const double c = crow[kk];
        if (c == 0.0) continue;
        const double* wrow = W.data() + kk * fo;
        for (std::size_t j = 0; j < fo; ++j) nrow[j] += c * wrow[j];
      }
      const std::vector<double>& b = p.biases[l];
      for (std::size_t j = 0; j < fo; ++j) nrow[j] += b[j];
    }
    if (l + 1 < dims.size()) {
      for (double& v : next) v = v > 0.0 ? v : 0.0;
    }
    cur.swap(next);
  }
  out.swap(cur);
}

}  // namespace

std::vector<double> forward_logits(const ModelParams& p, const double* x,
                                   std::size_t batch) {
  std::vector<double> out;
  dense_forward(p, x, batch, out);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!std::isfinite(out[i])) {
      throw NonFiniteError(fmt::format(
          "forward: non-finite logit at row {} class {}", i / p.spec.classes,
          i % p.spec.classes));
    }
  }
  return out;
}

int argmax_row(const double* row, std::size_t classes) {
  int best = 0;
  for (std::size_t j = 1; j < classes; ++j) {
    if (row[j] > row[best]) best = static_cast<int>(j);
  }
  return best;
}

std::vector<int> predict(const ModelParams& p, const double* x,
                         std::size_t batch) {
  const auto logits = forward_logits(p, x, batch);
  const std::size_t c = p.spec.classes;
  std::vector<int> preds(batch);
  for (std::size_t i = 0; i < batch; ++i) {
    preds[i] = argmax_row(logits.data() + i * c, c);
  }
  return preds;
}

std::vector<double> class_probs(const ModelParams& p, const double* x,
                                std::size_t batch) {
  auto logits = forward_logits(p, x, batch);
  const std::size_t c = p.spec.classes;
  for (std::size_t i = 0; i < batch; ++i) {
    double* row = logits.data() + i * c;
    double mx = row[0];
    for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, row[j]);
    double z = 0.0;
    for (std::size_t j = 0; j < c; ++j) z += std::exp(row[j] - mx);
    for (std::size_t j = 0; j < c; ++j) row[j] = std::exp(row[j] - mx) / z;
  }
  return logits;
}

TapedMlp lift_trainable(Tape& tape, const ModelParams& p) {
  TapedMlp m;
  const auto dims = p.spec.layer_dims();
  for (std::size_t l = 0; l < dims.size(); ++l) {
    m.weights.push_back(tape.var({dims[l].first, dims[l].second}, p.weights[l]));
    m.biases.push_back(tape.var({dims[l].second}, p.biases[l]));
  }
  return m;
}

TapedMlp lift_frozen(const ModelParams& p) {
  TapedMlp m;
  const auto dims = p.spec.layer_dims();
  for (std::size_t l = 0; l < dims.size(); ++l) {
    m.weights.emplace_back(Shape{dims[l].first, dims[l].second}, p.weights[l]);
    m.biases.emplace_back(Shape{dims[l].second}, p.biases[l]);
  }
  return m;
}

Tensor mlp_forward(const TapedMlp& m, const Tensor& x) {
  if (x.shape().size() != 2 || x.shape()[1] != m.weights.front().shape()[0]) {
    throw ShapeError(fmt::format(
        "forward: input is {}-column, model expects {}",
        x.shape().size() == 2 ? x.shape()[1] : 0, m.weights.front().shape()[0]));
  }
  Tensor h = x;
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    h = add_rowvec(matmul(h, m.weights[l]), m.biases[l]);
    if (l + 1 < m.weights.size()) h = relu(h);
  }
  return h;
}

std::vector<double> flatten_gradients(const TapedMlp& m, const Gradients& g) {
  std::vector<double> flat;
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    const auto& gw = g.at(m.weights[l]);
    flat.insert(flat.end(), gw.begin(), gw.end());
    const auto& gb = g.at(m.biases[l]);
    flat.insert(flat.end(), gb.begin(), gb.end());
  }
  return flat;
}

}  // namespace arow
