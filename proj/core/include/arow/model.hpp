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

#include <cstdint>
#include <utility>
#include <vector>

#include "arow/tensor.hpp"

namespace arow {

/// Dense relu network topology plus the seed that fixes its initialization.
struct MlpSpec {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden;
  std::size_t classes = 0;
  std::uint64_t seed = 0;

  void validate() const;  // classes >= 2, all widths >= 1
  std::vector<std::pair<std::size_t, std::size_t>> layer_dims() const;
  std::size_t param_count() const;
  bool same_dims(const MlpSpec& other) const;
};

/// Layered weights/biases, addressable as one flat vector. Weight matrices
/// are fan_in x fan_out row-major so a forward pass is x . W + b.
struct ModelParams {
  MlpSpec spec;
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;

  std::vector<double> flatten() const;
  static ModelParams unflatten(const MlpSpec& spec,
                               const std::vector<double>& flat);
};

/// He-initialized parameters: W ~ N(0, 2/fan_in), biases zero, seeded draw.
ModelParams init_params(const MlpSpec& spec);

// Value-only fast paths (no tape). `x` is batch-major, batch x input_dim.
std::vector<double> forward_logits(const ModelParams& p, const double* x,
                                   std::size_t batch);
std::vector<int> predict(const ModelParams& p, const double* x,
                         std::size_t batch);
std::vector<double> class_probs(const ModelParams& p, const double* x,
                                std::size_t batch);

inline std::vector<int> predict(const ModelParams& p,
                                const std::vector<double>& x,
                                std::size_t batch) {
  return predict(p, x.data(), batch);
}

/// Argmax with ties broken by the lowest class index.
int argmax_row(const double* row, std::size_t classes);

/// Model parameters lifted onto a tape (or left constant) for
/// differentiation through mlp_forward.
struct TapedMlp {
  std::vector<Tensor> weights;
  std::vector<Tensor> biases;
};

TapedMlp lift_trainable(Tape& tape, const ModelParams& p);  // params get grads
TapedMlp lift_frozen(const ModelParams& p);                 // params constant

/// Logits for a [B x input_dim] tensor; differentiable w.r.t. whatever is
/// on the tape (parameters, the input, or both).
Tensor mlp_forward(const TapedMlp& m, const Tensor& x);

/// Gradients of every layer, flattened in parameter order.
std::vector<double> flatten_gradients(const TapedMlp& m, const Gradients& g);

}  // namespace arow
