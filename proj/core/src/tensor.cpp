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
#include "arow/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <fmt/format.h>

namespace arow {

namespace {

std::size_t shape_numel(const Shape& s) {
  std::size_t n = 1;
  for (std::size_t e : s) n *= e;
  return n;
}

void check_finite(const std::vector<double>& v, const char* op) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw NonFiniteError(
          fmt::format("{}: non-finite value {} at flat index {}", op, v[i], i));
    }
  }
}

void require_rank2(const Tensor& t, const char* op) {
  if (t.shape().size() != 2) {
    throw ShapeError(fmt::format("{}: expected a rank-2 tensor, got rank {}",
                                 op, t.shape().size()));
  }
}

Tape* tape_of(const Tensor& a, const Tensor& b, const char* op) {
  Tape* ta = const_cast<Tape*>(a.tape());
  Tape* tb = const_cast<Tape*>(b.tape());
  if (ta && tb && ta != tb) {
    throw Error(fmt::format("{}: operands recorded on different tapes", op));
  }
  return ta ? ta : tb;
}

/// Records on the operands' tape when any operand is taped; otherwise the
/// result is a constant.
Tensor emit(Tape* tape, Shape shape, std::vector<double> data,
            std::vector<int> parents, Tape::VjpFn vjp, const char* op) {
  check_finite(data, op);
  if (tape == nullptr) return Tensor(std::move(shape), std::move(data));
  return tape->record(std::move(shape), std::move(data), std::move(parents),
                      std::move(vjp));
}

int node_or_minus1(const Tensor& t) { return t.on_tape() ? t.node() : -1; }

}  // namespace

// ---------------------------------------------------------------------------
// Tensor
// ---------------------------------------------------------------------------

Tensor::Tensor(Shape shape, std::vector<double> data)
    : Tensor(std::move(shape),
             std::make_shared<const std::vector<double>>(std::move(data))) {}

Tensor::Tensor(Shape shape, Storage data) {
  if (!data) throw Error("tensor: null storage");
  if (shape_numel(shape) != data->size()) {
    throw ShapeError(fmt::format(
        "tensor: shape implies {} elements but data holds {}",
        shape_numel(shape), data->size()));
  }
  check_finite(*data, "tensor");
  shape_ = std::move(shape);
  data_ = std::move(data);
}

Tensor Tensor::zeros(Shape shape) {
  std::vector<double> d(shape_numel(shape), 0.0);
  return Tensor(std::move(shape), std::move(d));
}

const std::vector<double>& Tensor::data() const {
  if (!data_) throw Error("tensor: access to default-constructed tensor");
  return *data_;
}

double Tensor::value() const {
  if (size() != 1) {
    throw ShapeError(
        fmt::format("tensor: value() needs a single element, size is {}", size()));
  }
  return data()[0];
}

std::size_t Tensor::rows() const {
  require_rank2(*this, "rows");
  return shape_[0];
}

std::size_t Tensor::cols() const {
  require_rank2(*this, "cols");
  return shape_[1];
}

// ---------------------------------------------------------------------------
// Tape
// ---------------------------------------------------------------------------

Tensor Tape::var(Shape shape, std::vector<double> data) {
  return record(std::move(shape), std::move(data), {}, {});
}

Tensor Tape::record(Shape shape, std::vector<double> data,
                    std::vector<int> parents, VjpFn vjp) {
  return record(std::move(shape),
                std::make_shared<const std::vector<double>>(std::move(data)),
                std::move(parents), std::move(vjp));
}

Tensor Tape::record(Shape shape, Tensor::Storage data, std::vector<int> parents,
                    VjpFn vjp) {
  for (int p : parents) {
    if (p >= static_cast<int>(nodes_.size())) {
      throw Error("tape: operand recorded after its consumer");
    }
  }
  Tensor t(std::move(shape), std::move(data));
  nodes_.push_back(Node{t.size(), std::move(parents), std::move(vjp)});
  t.tape_ = this;
  t.node_ = static_cast<int>(nodes_.size()) - 1;
  return t;
}

Gradients Tape::backward(const Tensor& root) const {
  if (root.tape() != this) {
    throw Error("backward: root does not belong to this tape");
  }
  if (root.size() != 1) {
    throw ShapeError(fmt::format(
        "backward: root must be a scalar, got {} elements", root.size()));
  }

  auto grads = std::make_shared<std::vector<std::vector<double>>>();
  grads->resize(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    (*grads)[i].assign(nodes_[i].len, 0.0);
  }

  // Mark nodes the root actually depends on; everything else keeps zeros.
  std::vector<char> reachable(nodes_.size(), 0);
  std::vector<int> stack{root.node()};
  reachable[root.node()] = 1;
  while (!stack.empty()) {
    int i = stack.back();
    stack.pop_back();
    for (int p : nodes_[i].parents) {
      if (p >= 0 && !reachable[p]) {
        reachable[p] = 1;
        stack.push_back(p);
      }
    }
  }

  (*grads)[root.node()][0] = 1.0;
  for (int i = root.node(); i >= 0; --i) {
    if (!reachable[i] || !nodes_[i].vjp) continue;
    std::vector<std::vector<double>*> parent_grads;
    parent_grads.reserve(nodes_[i].parents.size());
    for (int p : nodes_[i].parents) {
      parent_grads.push_back(p >= 0 ? &(*grads)[p] : nullptr);
    }
    nodes_[i].vjp((*grads)[i], parent_grads);
  }

  Gradients out;
  out.tape_ = this;
  out.grads_ = std::move(grads);
  return out;
}

const std::vector<double>& Gradients::at(const Tensor& t) const {
  if (t.tape() != tape_ || t.node() < 0 ||
      t.node() >= static_cast<int>(grads_->size())) {
    throw Error("gradients: tensor is not a node of the differentiated tape");
  }
  return (*grads_)[t.node()];
}

// ---------------------------------------------------------------------------
// matmul
// ---------------------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank2(a, "matmul");
  require_rank2(b, "matmul");
  const std::size_t m = a.shape()[0], k = a.shape()[1];
  const std::size_t k2 = b.shape()[0], n = b.shape()[1];
  if (k != k2) {
    throw ShapeError(fmt::format("matmul: inner extents disagree, {}x{} by {}x{}",
                                 m, k, k2, n));
  }

  const auto& A = a.data();
  const auto& B = b.data();
  std::vector<double> out(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = A[i * k + p];
      const double* brow = B.data() + p * n;
      double* orow = out.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += aip * brow[j];
    }
  }

  Tape* tape = tape_of(a, b, "matmul");
  auto vjp = [m, k, n, As = a.storage(), Bs = b.storage()](
                 const std::vector<double>& g,
                 const std::vector<std::vector<double>*>& pg) {
    const std::vector<double>& A = *As;
    const std::vector<double>& B = *Bs;
    if (pg[0]) {  // dA = g . B^T
      std::vector<double>& ga = *pg[0];
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          const double* grow = g.data() + i * n;
          const double* brow = B.data() + p * n;
          double acc = 0.0;
          for (std::size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
          ga[i * k + p] += acc;
        }
      }
    }
    if (pg[1]) {  // dB = A^T . g
      std::vector<double>& gb = *pg[1];
      for (std::size_t i = 0; i < m; ++i) {
        const double* arow = A.data() + i * k;
        const double* grow = g.data() + i * n;
        for (std::size_t p = 0; p < k; ++p) {
          const double aip = arow[p];
          double* gbrow = gb.data() + p * n;
          for (std::size_t j = 0; j < n; ++j) gbrow[j] += aip * grow[j];
        }
      }
    }
  };
  return emit(tape, {m, n}, std::move(out),
              {node_or_minus1(a), node_or_minus1(b)}, std::move(vjp), "matmul");
}

// ---------------------------------------------------------------------------
// elementwise binaries with scalar broadcasting
// ---------------------------------------------------------------------------

namespace {

enum class Bcast { kNone, kLeftScalar, kRightScalar };

Bcast binary_layout(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() == b.shape()) return Bcast::kNone;
  if (a.size() == 1) return Bcast::kLeftScalar;
  if (b.size() == 1) return Bcast::kRightScalar;
  throw ShapeError(fmt::format(
      "{}: shapes are neither equal nor scalar-broadcastable ({} vs {} elements)",
      op, a.size(), b.size()));
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  const Bcast bc = binary_layout(a, b, "add");
  const auto& A = a.data();
  const auto& B = b.data();
  const std::size_t n = std::max(A.size(), B.size());
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = A[bc == Bcast::kLeftScalar ? 0 : i] +
             B[bc == Bcast::kRightScalar ? 0 : i];
  }
  Shape shape = (bc == Bcast::kLeftScalar) ? b.shape() : a.shape();
  auto vjp = [bc, n](const std::vector<double>& g,
                     const std::vector<std::vector<double>*>& pg) {
    if (pg[0]) {
      if (bc == Bcast::kLeftScalar) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += g[i];
        (*pg[0])[0] += acc;
      } else {
        for (std::size_t i = 0; i < n; ++i) (*pg[0])[i] += g[i];
      }
    }
    if (pg[1]) {
      if (bc == Bcast::kRightScalar) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += g[i];
        (*pg[1])[0] += acc;
      } else {
        for (std::size_t i = 0; i < n; ++i) (*pg[1])[i] += g[i];
      }
    }
  };
  return emit(tape_of(a, b, "add"), std::move(shape), std::move(out),
              {node_or_minus1(a), node_or_minus1(b)}, std::move(vjp), "add");
}

Tensor sub(const Tensor& a, const Tensor& b) {
  const Bcast bc = binary_layout(a, b, "sub");
  const auto& A = a.data();
  const auto& B = b.data();
  const std::size_t n = std::max(A.size(), B.size());
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = A[bc == Bcast::kLeftScalar ? 0 : i] -
             B[bc == Bcast::kRightScalar ? 0 : i];
  }
  Shape shape = (bc == Bcast::kLeftScalar) ? b.shape() : a.shape();
  auto vjp = [bc, n](const std::vector<double>& g,
                     const std::vector<std::vector<double>*>& pg) {
    if (pg[0]) {
      if (bc == Bcast::kLeftScalar) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += g[i];
        (*pg[0])[0] += acc;
      } else {
        for (std::size_t i = 0; i < n; ++i) (*pg[0])[i] += g[i];
      }
    }
    if (pg[1]) {
      if (bc == Bcast::kRightScalar) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += g[i];
        (*pg[1])[0] -= acc;
      } else {
        for (std::size_t i = 0; i < n; ++i) (*pg[1])[i] -= g[i];
      }
    }
  };
  return emit(tape_of(a, b, "sub"), std::move(shape), std::move(out),
              {node_or_minus1(a), node_or_minus1(b)}, std::move(vjp), "sub");
}

Tensor mul(const Tensor& a, const Tensor& b) {
  const Bcast bc = binary_layout(a, b, "mul");
  const auto& A = a.data();
  const auto& B = b.data();
  const std::size_t n = std::max(A.size(), B.size());
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = A[bc == Bcast::kLeftScalar ? 0 : i] *
             B[bc == Bcast::kRightScalar ? 0 : i];
  }
  Shape shape = (bc == Bcast::kLeftScalar) ? b.shape() : a.shape();
  auto vjp = [bc, n, vas = a.storage(), vbs = b.storage()](
                 const std::vector<double>& g,
                 const std::vector<std::vector<double>*>& pg) {
    const std::vector<double>& va = *vas;
    const std::vector<double>& vb = *vbs;
    if (pg[0]) {
      if (bc == Bcast::kLeftScalar) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += g[i] * vb[i];
        (*pg[0])[0] += acc;
      } else {
        for (std::size_t i = 0; i < n; ++i) {
          (*pg[0])[i] += g[i] * vb[bc == Bcast::kRightScalar ? 0 : i];
        }
      }
    }
    if (pg[1]) {
      if (bc == Bcast::kRightScalar) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += g[i] * va[i];
        (*pg[1])[0] += acc;
      } else {
        for (std::size_t i = 0; i < n; ++i) {
          (*pg[1])[i] += g[i] * va[bc == Bcast::kLeftScalar ? 0 : i];
        }
      }
    }
  };
  return emit(tape_of(a, b, "mul"), std::move(shape), std::move(out),
              {node_or_minus1(a), node_or_minus1(b)}, std::move(vjp), "mul");
}

// ---------------------------------------------------------------------------
// elementwise unaries
// ---------------------------------------------------------------------------

namespace {

Tensor unary(const Tensor& t, const char* op,
             const std::function<double(double)>& f,
             std::function<void(const std::vector<double>&,
                                const std::vector<double>&,
                                const std::vector<double>&,
                                std::vector<double>&)> dvjp) {
  const auto& X = t.data();
  std::vector<double> out(X.size());
  for (std::size_t i = 0; i < X.size(); ++i) out[i] = f(X[i]);
  check_finite(out, op);
  auto out_sp = std::make_shared<const std::vector<double>>(std::move(out));
  Tape* tape = const_cast<Tape*>(t.tape());
  if (tape == nullptr) return Tensor(t.shape(), std::move(out_sp));
  auto vjp = [xs = t.storage(), ys = out_sp, dvjp = std::move(dvjp)](
                 const std::vector<double>& g,
                 const std::vector<std::vector<double>*>& pg) {
    if (pg[0]) dvjp(g, *xs, *ys, *pg[0]);
  };
  return tape->record(t.shape(), std::move(out_sp), {t.node()}, std::move(vjp));
}

}  // namespace

Tensor relu(const Tensor& t) {
  return unary(
      t, "relu", [](double v) { return v > 0.0 ? v : 0.0; },
      [](const std::vector<double>& g, const std::vector<double>& x,
         const std::vector<double>&, std::vector<double>& gx) {
        for (std::size_t i = 0; i < g.size(); ++i) {
          if (x[i] > 0.0) gx[i] += g[i];
        }
      });
}

Tensor exp(const Tensor& t) {
  return unary(
      t, "exp", [](double v) { return std::exp(v); },
      [](const std::vector<double>& g, const std::vector<double>&,
         const std::vector<double>& y, std::vector<double>& gx) {
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * y[i];
      });
}

Tensor log(const Tensor& t) {
  const auto& X = t.data();
  for (std::size_t i = 0; i < X.size(); ++i) {
    if (!(X[i] > 0.0)) {
      throw DomainError(
          fmt::format("log: non-positive value {} at flat index {}", X[i], i));
    }
  }
  return unary(
      t, "log", [](double v) { return std::log(v); },
      [](const std::vector<double>& g, const std::vector<double>& x,
         const std::vector<double>&, std::vector<double>& gx) {
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] / x[i];
      });
}

Tensor tanh(const Tensor& t) {
  return unary(
      t, "tanh", [](double v) { return std::tanh(v); },
      [](const std::vector<double>& g, const std::vector<double>&,
         const std::vector<double>& y, std::vector<double>& gx) {
        for (std::size_t i = 0; i < g.size(); ++i) {
          gx[i] += g[i] * (1.0 - y[i] * y[i]);
        }
      });
}

Tensor clamp(const Tensor& t, double lo, double hi) {
  if (!(lo <= hi)) {
    throw DomainError(fmt::format("clamp: lo {} exceeds hi {}", lo, hi));
  }
  return unary(
      t, "clamp",
      [lo, hi](double v) { return std::min(std::max(v, lo), hi); },
      [lo, hi](const std::vector<double>& g, const std::vector<double>& x,
               const std::vector<double>&, std::vector<double>& gx) {
        for (std::size_t i = 0; i < g.size(); ++i) {
          if (x[i] > lo && x[i] < hi) gx[i] += g[i];
        }
      });
}

Tensor scale(const Tensor& t, double c) {
  if (!std::isfinite(c)) throw DomainError("scale: non-finite factor");
  return unary(
      t, "scale", [c](double v) { return c * v; },
      [c](const std::vector<double>& g, const std::vector<double>&,
          const std::vector<double>&, std::vector<double>& gx) {
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += c * g[i];
      });
}

Tensor add_const(const Tensor& t, double c) {
  if (!std::isfinite(c)) throw DomainError("add_const: non-finite addend");
  return unary(
      t, "add_const", [c](double v) { return v + c; },
      [](const std::vector<double>& g, const std::vector<double>&,
         const std::vector<double>&, std::vector<double>& gx) {
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
      });
}

Tensor rsub_const(double c, const Tensor& t) {
  if (!std::isfinite(c)) throw DomainError("rsub_const: non-finite minuend");
  return unary(
      t, "rsub_const", [c](double v) { return c - v; },
      [](const std::vector<double>& g, const std::vector<double>&,
         const std::vector<double>&, std::vector<double>& gx) {
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] -= g[i];
      });
}

// ---------------------------------------------------------------------------
// softmax, reductions, indexing
// ---------------------------------------------------------------------------

Tensor log_softmax(const Tensor& logits) {
  require_rank2(logits, "log_softmax");
  const std::size_t b = logits.shape()[0], c = logits.shape()[1];
  if (c < 2) {
    throw ShapeError(fmt::format("log_softmax: needs >= 2 classes, got {}", c));
  }
  const auto& X = logits.data();
  std::vector<double> out(b * c);
  for (std::size_t i = 0; i < b; ++i) {
    const double* row = X.data() + i * c;
    double mx = row[0];
    for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, row[j]);
    double lse = 0.0;
    for (std::size_t j = 0; j < c; ++j) lse += std::exp(row[j] - mx);
    lse = std::log(lse);
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] = row[j] - mx - lse;
  }
  check_finite(out, "log_softmax");
  auto out_sp = std::make_shared<const std::vector<double>>(std::move(out));
  Tape* tape = const_cast<Tape*>(logits.tape());
  if (tape == nullptr) return Tensor(logits.shape(), std::move(out_sp));
  auto vjp = [b, c, ys = out_sp](const std::vector<double>& g,
                                 const std::vector<std::vector<double>*>& pg) {
    if (!pg[0]) return;
    const std::vector<double>& y = *ys;
    std::vector<double>& gx = *pg[0];
    for (std::size_t i = 0; i < b; ++i) {
      double gs = 0.0;
      for (std::size_t j = 0; j < c; ++j) gs += g[i * c + j];
      for (std::size_t j = 0; j < c; ++j) {
        gx[i * c + j] += g[i * c + j] - std::exp(y[i * c + j]) * gs;
      }
    }
  };
  return tape->record(logits.shape(), std::move(out_sp), {logits.node()},
                      std::move(vjp));
}

Tensor add_rowvec(const Tensor& m, const Tensor& v) {
  require_rank2(m, "add_rowvec");
  const std::size_t b = m.shape()[0], c = m.shape()[1];
  if (v.shape().size() != 1 || v.shape()[0] != c) {
    throw ShapeError(fmt::format(
        "add_rowvec: vector length {} does not match row width {}", v.size(), c));
  }
  const auto& M = m.data();
  const auto& V = v.data();
  std::vector<double> out(b * c);
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] = M[i * c + j] + V[j];
  }
  auto vjp = [b, c](const std::vector<double>& g,
                    const std::vector<std::vector<double>*>& pg) {
    if (pg[0]) {
      for (std::size_t i = 0; i < g.size(); ++i) (*pg[0])[i] += g[i];
    }
    if (pg[1]) {
      for (std::size_t j = 0; j < c; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < b; ++i) acc += g[i * c + j];
        (*pg[1])[j] += acc;
      }
    }
  };
  return emit(tape_of(m, v, "add_rowvec"), m.shape(), std::move(out),
              {node_or_minus1(m), node_or_minus1(v)}, std::move(vjp),
              "add_rowvec");
}

Tensor select_cols(const Tensor& m, const std::vector<int>& idx) {
  require_rank2(m, "select_cols");
  const std::size_t b = m.shape()[0], c = m.shape()[1];
  if (idx.size() != b) {
    throw ShapeError(fmt::format(
        "select_cols: {} indices for {} rows", idx.size(), b));
  }
  for (std::size_t i = 0; i < b; ++i) {
    if (idx[i] < 0 || static_cast<std::size_t>(idx[i]) >= c) {
      throw DomainError(fmt::format(
          "select_cols: index {} out of range [0, {}) at row {}", idx[i], c, i));
    }
  }
  const auto& M = m.data();
  std::vector<double> out(b);
  for (std::size_t i = 0; i < b; ++i) out[i] = M[i * c + idx[i]];
  auto vjp = [c, idx](const std::vector<double>& g,
                      const std::vector<std::vector<double>*>& pg) {
    if (!pg[0]) return;
    for (std::size_t i = 0; i < g.size(); ++i) {
      (*pg[0])[i * c + idx[i]] += g[i];
    }
  };
  return emit(const_cast<Tape*>(m.tape()), {b}, std::move(out),
              {node_or_minus1(m)}, std::move(vjp), "select_cols");
}

Tensor row_sum(const Tensor& m) {
  require_rank2(m, "row_sum");
  const std::size_t b = m.shape()[0], c = m.shape()[1];
  const auto& M = m.data();
  std::vector<double> out(b, 0.0);
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < c; ++j) out[i] += M[i * c + j];
  }
  auto vjp = [c](const std::vector<double>& g,
                 const std::vector<std::vector<double>*>& pg) {
    if (!pg[0]) return;
    for (std::size_t i = 0; i < g.size(); ++i) {
      for (std::size_t j = 0; j < c; ++j) (*pg[0])[i * c + j] += g[i];
    }
  };
  return emit(const_cast<Tape*>(m.tape()), {b}, std::move(out),
              {node_or_minus1(m)}, std::move(vjp), "row_sum");
}

Tensor sum(const Tensor& t) {
  const auto& X = t.data();
  double acc = 0.0;
  for (double v : X) acc += v;
  auto vjp = [](const std::vector<double>& g,
                const std::vector<std::vector<double>*>& pg) {
    if (!pg[0]) return;
    for (double& v : *pg[0]) v += g[0];
  };
  return emit(const_cast<Tape*>(t.tape()), {1}, {acc}, {node_or_minus1(t)},
              std::move(vjp), "sum");
}

Tensor mean(const Tensor& t) {
  if (t.size() == 0) throw ShapeError("mean: empty tensor");
  const auto& X = t.data();
  double acc = 0.0;
  for (double v : X) acc += v;
  const double inv = 1.0 / static_cast<double>(X.size());
  auto vjp = [inv](const std::vector<double>& g,
                   const std::vector<std::vector<double>*>& pg) {
    if (!pg[0]) return;
    for (double& v : *pg[0]) v += g[0] * inv;
  };
  return emit(const_cast<Tape*>(t.tape()), {1}, {acc * inv},
              {node_or_minus1(t)}, std::move(vjp), "mean");
}

Tensor detach(const Tensor& t) { return Tensor(t.shape(), t.storage()); }

}  // namespace arow
