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

#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

#include "arow/error.hpp"

namespace arow {

using Shape = std::vector<std::size_t>;

class Tape;
class Gradients;

/// Shape-tagged array of 64-bit floats in row-major order.
///
/// A Tensor is a value type with shared immutable storage, so copies are
/// cheap. It is either a constant (no tape handle) or a handle to a node
/// recorded on a Tape; only taped tensors participate in backward().
/// Data is immutable after creation and validated to be finite: any
/// primitive that would produce NaN/Inf from finite inputs throws
/// NonFiniteError instead of propagating silently.
class Tensor {
 public:
  using Storage = std::shared_ptr<const std::vector<double>>;

  Tensor() = default;

  /// Constant tensor. Throws ShapeError if product(shape) != data.size(),
  /// NonFiniteError if data contains non-finite values.
  Tensor(Shape shape, std::vector<double> data);
  Tensor(Shape shape, Storage data);

  static Tensor scalar(double v) { return Tensor({1}, {v}); }
  static Tensor zeros(Shape shape);

  const Shape& shape() const { return shape_; }
  std::size_t size() const { return data_ ? data_->size() : 0; }
  const std::vector<double>& data() const;
  const Storage& storage() const { return data_; }

  /// Value of a single-element tensor. Throws ShapeError otherwise.
  double value() const;

  bool on_tape() const { return tape_ != nullptr; }
  const Tape* tape() const { return tape_; }
  int node() const { return node_; }

  std::size_t rows() const;  ///< first extent of a rank-2 tensor
  std::size_t cols() const;  ///< second extent of a rank-2 tensor

 private:
  friend class Tape;
  Shape shape_{};
  Storage data_{};
  Tape* tape_ = nullptr;
  int node_ = -1;
};

/// Result of a backward pass: one gradient buffer per tape node.
class Gradients {
 public:
  /// Gradient of the backward root w.r.t. `t`. Throws if `t` is not a node
  /// on the tape this pass ran over. Unreached nodes have zero gradients.
  const std::vector<double>& at(const Tensor& t) const;

 private:
  friend class Tape;
  const Tape* tape_ = nullptr;
  std::shared_ptr<std::vector<std::vector<double>>> grads_;
};

/// Ordered record of primitive operations for reverse-mode differentiation.
///
/// Nodes are appended in execution order, so every operand precedes its
/// consumers and one reverse sweep visits each node exactly once. A tape
/// is intended to live for a single forward/backward pair and is not
/// thread-safe; independent tapes may be used from different threads.
class Tape {
 public:
  using VjpFn = std::function<void(
      const std::vector<double>& upstream,
      const std::vector<std::vector<double>*>& parent_grads)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Leaf node (differentiable input: parameters, attacked points).
  Tensor var(Shape shape, std::vector<double> data);

  /// Record an op result. `parents` holds node ids of taped operands with
  /// -1 in slots occupied by constants; `vjp` receives grad buffers in the
  /// same slot order (nullptr for constants).
  Tensor record(Shape shape, std::vector<double> data, std::vector<int> parents,
                VjpFn vjp);
  Tensor record(Shape shape, Tensor::Storage data, std::vector<int> parents,
                VjpFn vjp);

  /// Reverse sweep from a scalar root. Deterministic: two passes over the
  /// same tape yield bitwise-identical gradients.
  Gradients backward(const Tensor& root) const;

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    std::size_t len;
    std::vector<int> parents;
    VjpFn vjp;  // empty for leaves
  };
  std::vector<Node> nodes_;
};

// ---------------------------------------------------------------------------
// Primitives. Elementwise binaries accept equal shapes or a single-element
// tensor against an array (scalar broadcasting); no general broadcasting.
// ---------------------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);

Tensor relu(const Tensor& t);        // backward: subgradient 0 at the kink
Tensor exp(const Tensor& t);
Tensor log(const Tensor& t);         // DomainError on non-positive input
Tensor tanh(const Tensor& t);
Tensor clamp(const Tensor& t, double lo, double hi);  // grad only inside (lo, hi)

/// Row-wise log-softmax of a [B x C] tensor, C >= 2, max-stabilized.
Tensor log_softmax(const Tensor& logits);

/// Adds a length-C vector to every row of a [B x C] tensor (bias add).
Tensor add_rowvec(const Tensor& m, const Tensor& v);

/// out[b] = m[b, idx[b]]; gradient flows to the selected entries only.
Tensor select_cols(const Tensor& m, const std::vector<int>& idx);

Tensor row_sum(const Tensor& m);     // [B x C] -> [B]
Tensor sum(const Tensor& t);         // -> scalar
Tensor mean(const Tensor& t);        // -> scalar

Tensor scale(const Tensor& t, double c);
Tensor add_const(const Tensor& t, double c);
Tensor rsub_const(double c, const Tensor& t);  // c - t

/// Constant copy sharing storage; cuts the tensor off the tape.
Tensor detach(const Tensor& t);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }

}  // namespace arow
