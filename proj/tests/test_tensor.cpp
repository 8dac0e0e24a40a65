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
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "arow/tensor.hpp"
#include "testutil.hpp"

using namespace arow;
namespace tu = arow::testutil;

TEST_CASE("tensor shape/data contract") {
  CHECK_THROWS_AS(Tensor({2, 3}, std::vector<double>(5, 0.0)), ShapeError);
  CHECK_THROWS_AS(Tensor({2}, {1.0, std::numeric_limits<double>::infinity()}),
                  NonFiniteError);
  Tensor t({2, 2}, {1, 2, 3, 4});
  CHECK(t.size() == 4);
  CHECK_FALSE(t.on_tape());
}

TEST_CASE("matmul forward") {
  // identity case
  Tensor i2({2, 2}, {1, 0, 0, 1});
  Tensor b({2, 2}, {3, 4, 5, 6});
  CHECK(matmul(i2, b).data() == std::vector<double>{3, 4, 5, 6});
  // scalar product
  CHECK(matmul(Tensor({1, 1}, {2}), Tensor({1, 1}, {3})).value() == 6.0);
  // shape mismatch names dims
  CHECK_THROWS_WITH_AS(matmul(Tensor({1, 2}, {1, 2}), Tensor({3, 1}, {1, 2, 3})),
                       doctest::Contains("inner extents"), ShapeError);
}

TEST_CASE("elementwise forward values") {
  Tensor x({3}, {-1, 0, 2});
  CHECK(relu(x).data() == std::vector<double>{0, 0, 2});
  CHECK(arow::tanh(Tensor::scalar(0.0)).value() == 0.0);
  CHECK(clamp(Tensor({3}, {-0.1, 0.5, 1.3}), 0.0, 1.0).data() ==
        std::vector<double>{0, 0.5, 1});
  CHECK_THROWS_AS(arow::log(Tensor({2}, {1.0, 0.0})), DomainError);
  CHECK_THROWS_AS(arow::exp(Tensor::scalar(1e9)), NonFiniteError);
}

TEST_CASE("scalar broadcasting") {
  Tensor a({3}, {1, 2, 3});
  Tensor s = Tensor::scalar(10.0);
  CHECK(add(a, s).data() == std::vector<double>{11, 12, 13});
  CHECK(add(s, a).data() == std::vector<double>{11, 12, 13});
  CHECK(mul(a, s).data() == std::vector<double>{10, 20, 30});
  CHECK(sub(s, a).data() == std::vector<double>{9, 8, 7});
  CHECK_THROWS_AS(add(a, Tensor({2}, {1, 2})), ShapeError);
}

TEST_CASE("log_softmax rows") {
  // symmetry
  Tensor t = log_softmax(Tensor({1, 2}, {0, 0}));
  CHECK(t.data()[0] == doctest::Approx(-std::log(2.0)).epsilon(1e-15));
  // stabilization under extreme logits
  Tensor big = log_softmax(Tensor({1, 2}, {1000, 0}));
  CHECK(big.data()[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(big.data()[1] == doctest::Approx(-1000.0).epsilon(1e-12));
  // rows of exp sum to 1 within 1e-12, logsumexp of rows is 0
  std::mt19937_64 rng(11);
  Tensor r = log_softmax(Tensor({4, 5}, tu::random_vector(rng, 20, -3, 3)));
  for (std::size_t i = 0; i < 4; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < 5; ++j) sum += std::exp(r.data()[i * 5 + j]);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(log_softmax(Tensor({2, 1}, {1, 2})), ShapeError);
}

TEST_CASE("backward basics") {
  SUBCASE("root must be scalar") {
    Tape tape;
    Tensor x = tape.var({2}, {1, 2});
    CHECK_THROWS_AS(tape.backward(x), ShapeError);
  }
  SUBCASE("sum gives all-ones") {
    Tape tape;
    Tensor x = tape.var({2, 3}, {1, 2, 3, 4, 5, 6});
    auto g = tape.backward(sum(x));
    CHECK(g.at(x) == std::vector<double>(6, 1.0));
  }
  SUBCASE("x*x at 3 gives 6") {
    Tape tape;
    Tensor x = tape.var({1}, {3.0});
    auto g = tape.backward(sum(mul(x, x)));
    CHECK(g.at(x)[0] == doctest::Approx(6.0).epsilon(1e-15));
  }
  SUBCASE("unreached nodes keep zero gradients") {
    Tape tape;
    Tensor x = tape.var({1}, {3.0});
    Tensor y = tape.var({1}, {4.0});
    auto g = tape.backward(sum(mul(x, x)));
    CHECK(g.at(y) == std::vector<double>{0.0});
  }
}

TEST_CASE("tape replay is bitwise deterministic") {
  std::mt19937_64 rng(5150);
  Tape tape;
  Tensor a = tape.var({3, 4}, tu::random_vector(rng, 12));
  Tensor b = tape.var({4, 2}, tu::random_vector(rng, 8));
  Tensor loss = sum(arow::tanh(matmul(relu(a), b)));
  auto g1 = tape.backward(loss);
  auto g2 = tape.backward(loss);
  CHECK(g1.at(a) == g2.at(a));
  CHECK(g1.at(b) == g2.at(b));
}

namespace {

// Randomized Jacobian check: for scalar s = sum(w * f(x)), the analytic
// gradient must match the finite-difference oracle on the same instance.
void check_primitive_grad(
    std::uint64_t seed, std::size_t arity,
    const std::function<Tensor(const std::vector<Tensor>&)>& op,
    const std::vector<Shape>& shapes, double lo, double hi, int trials = 100) {
  std::mt19937_64 rng(seed);
  for (int t = 0; t < trials; ++t) {
    std::vector<std::vector<double>> inputs;
    std::size_t out_size = 0;
    {
      // probe output size once per instance
      std::vector<Tensor> consts;
      for (std::size_t a = 0; a < arity; ++a) {
        std::size_t n = 1;
        for (auto e : shapes[a]) n *= e;
        inputs.push_back(tu::random_vector(rng, n, lo, hi));
        consts.emplace_back(shapes[a], inputs.back());
      }
      out_size = op(consts).size();
    }
    const std::vector<double> w = tu::random_vector(rng, out_size, -1, 1);

    auto scalarize = [&](const std::vector<std::vector<double>>& vals) {
      std::vector<Tensor> consts;
      for (std::size_t a = 0; a < arity; ++a) consts.emplace_back(shapes[a], vals[a]);
      const Tensor out = op(consts);
      double s = 0.0;
      for (std::size_t i = 0; i < out.size(); ++i) s += w[i] * out.data()[i];
      return s;
    };

    // analytic gradients through the tape
    Tape tape;
    std::vector<Tensor> vars;
    for (std::size_t a = 0; a < arity; ++a) vars.push_back(tape.var(shapes[a], inputs[a]));
    Tensor out = op(vars);
    Tensor s = sum(mul(Tensor(out.shape(), w), out));
    auto grads = tape.backward(s);

    for (std::size_t a = 0; a < arity; ++a) {
      auto f = [&](const std::vector<double>& xa) {
        auto vals = inputs;
        vals[a] = xa;
        return scalarize(vals);
      };
      const auto fd = tu::finite_diff(f, inputs[a]);
      const double err = tu::max_rel_err(grads.at(vars[a]), fd);
      CAPTURE(t);
      CAPTURE(a);
      REQUIRE(err < 1e-4);
    }
  }
}

}  // namespace

TEST_CASE("gradients match the finite-difference oracle per primitive") {
  auto unary_shapes = std::vector<Shape>{{3, 4}};
  check_primitive_grad(101, 2,
                       [](const std::vector<Tensor>& v) { return matmul(v[0], v[1]); },
                       {{3, 4}, {4, 2}}, -1, 1, 100);
  check_primitive_grad(102, 2,
                       [](const std::vector<Tensor>& v) { return add(v[0], v[1]); },
                       {{3, 4}, {3, 4}}, -1, 1, 30);
  check_primitive_grad(103, 2,
                       [](const std::vector<Tensor>& v) { return sub(v[0], v[1]); },
                       {{3, 4}, {3, 4}}, -1, 1, 30);
  check_primitive_grad(104, 2,
                       [](const std::vector<Tensor>& v) { return mul(v[0], v[1]); },
                       {{3, 4}, {3, 4}}, -1, 1, 30);
  check_primitive_grad(105, 2,
                       [](const std::vector<Tensor>& v) { return mul(v[0], v[1]); },
                       {{1}, {3, 4}}, -1, 1, 30);  // scalar broadcast
  check_primitive_grad(106, 1,
                       [](const std::vector<Tensor>& v) { return relu(v[0]); },
                       unary_shapes, -1, 1, 100);
  check_primitive_grad(107, 1,
                       [](const std::vector<Tensor>& v) { return arow::exp(v[0]); },
                       unary_shapes, -1, 1, 100);
  check_primitive_grad(108, 1,
                       [](const std::vector<Tensor>& v) { return arow::log(v[0]); },
                       unary_shapes, 0.1, 2.0, 100);
  check_primitive_grad(109, 1,
                       [](const std::vector<Tensor>& v) { return arow::tanh(v[0]); },
                       unary_shapes, -2, 2, 100);
  check_primitive_grad(110, 1,
                       [](const std::vector<Tensor>& v) { return clamp(v[0], -0.5, 0.5); },
                       unary_shapes, -1, 1, 100);
  check_primitive_grad(111, 1,
                       [](const std::vector<Tensor>& v) { return log_softmax(v[0]); },
                       unary_shapes, -3, 3, 100);
  check_primitive_grad(112, 2,
                       [](const std::vector<Tensor>& v) { return add_rowvec(v[0], v[1]); },
                       {{3, 4}, {4}}, -1, 1, 30);
  check_primitive_grad(113, 1,
                       [](const std::vector<Tensor>& v) {
                         return select_cols(v[0], {1, 0, 3});
                       },
                       unary_shapes, -1, 1, 30);
  check_primitive_grad(114, 1,
                       [](const std::vector<Tensor>& v) { return row_sum(v[0]); },
                       unary_shapes, -1, 1, 30);
  check_primitive_grad(115, 1,
                       [](const std::vector<Tensor>& v) { return mean(v[0]); },
                       unary_shapes, -1, 1, 30);
  check_primitive_grad(116, 1,
                       [](const std::vector<Tensor>& v) { return scale(v[0], -2.5); },
                       unary_shapes, -1, 1, 30);
  check_primitive_grad(117, 1,
                       [](const std::vector<Tensor>& v) { return rsub_const(1.0, v[0]); },
                       unary_shapes, -1, 1, 30);
}

TEST_CASE("clamp passes gradient only inside the open interval") {
  Tape tape;
  Tensor x = tape.var({3}, {-0.5, 0.25, 1.5});
  auto g = tape.backward(sum(clamp(x, 0.0, 1.0)));
  CHECK(g.at(x) == std::vector<double>{0.0, 1.0, 0.0});
}

TEST_CASE("detach cuts the graph") {
  Tape tape;
  Tensor x = tape.var({2}, {1.0, 2.0});
  Tensor y = mul(detach(mul(x, x)), x);  // d/dx (c * x) with c = x^2 frozen
  auto g = tape.backward(sum(y));
  CHECK(g.at(x) == std::vector<double>{1.0, 4.0});
}

TEST_CASE("mixed-tape operands are rejected") {
  Tape t1, t2;
  Tensor a = t1.var({2}, {1, 2});
  Tensor b = t2.var({2}, {3, 4});
  CHECK_THROWS_AS(add(a, b), Error);
}
