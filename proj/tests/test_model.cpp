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
#include <cstdio>
#include <filesystem>

#include "arow/checkpoint.hpp"
#include "arow/io_util.hpp"
#include "arow/model.hpp"
#include "testutil.hpp"

using namespace arow;
namespace tu = arow::testutil;

namespace {

ModelParams single_linear_identity() {
  MlpSpec spec{2, {}, 2, 0};
  ModelParams p;
  p.spec = spec;
  p.weights = {{1, 0, 0, 1}};
  p.biases = {{0, 0}};
  return p;
}

}  // namespace

TEST_CASE("spec validation") {
  CHECK_THROWS_AS(MlpSpec{0, {4}, 2, 0}.validate(), ConfigError);
  CHECK_THROWS_AS(MlpSpec{2, {4}, 1, 0}.validate(), ConfigError);
  CHECK_THROWS_AS(MlpSpec{2, {0}, 2, 0}.validate(), ConfigError);
  CHECK(MlpSpec{2, {64, 64}, 2, 0}.param_count() ==
        2 * 64 + 64 + 64 * 64 + 64 + 64 * 2 + 2);
}

TEST_CASE("forward") {
  SUBCASE("zero weights give all-zero logits") {
    MlpSpec spec{3, {4}, 2, 1};
    ModelParams p = init_params(spec);
    for (auto& w : p.weights) std::fill(w.begin(), w.end(), 0.0);
    std::mt19937_64 rng(2);
    const auto x = tu::random_vector(rng, 6, 0, 1);
    for (double v : forward_logits(p, x.data(), 2)) CHECK(v == 0.0);
  }
  SUBCASE("identity layer passes input through") {
    const ModelParams p = single_linear_identity();
    const std::vector<double> x{1.0, 2.0};
    CHECK(forward_logits(p, x.data(), 1) == std::vector<double>{1.0, 2.0});
  }
  SUBCASE("fixed seed and input reproduce logits bitwise") {
    MlpSpec spec{3, {8, 8}, 4, 99};
    std::mt19937_64 rng(5);
    const auto x = tu::random_vector(rng, 9, 0, 1);
    const auto a = forward_logits(init_params(spec), x.data(), 3);
    const auto b = forward_logits(init_params(spec), x.data(), 3);
    CHECK(a == b);
  }
  SUBCASE("column mismatch is a shape error") {
    const ModelParams p = single_linear_identity();
    Tape tape;
    CHECK_THROWS_AS(mlp_forward(lift_trainable(tape, p),
                                Tensor({1, 3}, {1, 2, 3})),
                    ShapeError);
  }
}

TEST_CASE("predict") {
  const ModelParams p = single_linear_identity();
  SUBCASE("strict max") {
    const std::vector<double> x{0.1, 0.9};
    CHECK(predict(p, x, 1) == std::vector<int>{1});
  }
  SUBCASE("ties break to the lowest class index") {
    const std::vector<double> x{0.5, 0.5};
    CHECK(predict(p, x, 1) == std::vector<int>{0});
  }
  SUBCASE("invariant under adding a constant to all logits") {
    std::mt19937_64 rng(31);
    for (int t = 0; t < 50; ++t) {
      const auto logits = tu::random_vector(rng, 5, -2, 2);
      auto shifted = logits;
      for (double& v : shifted) v += 3.7;
      CHECK(argmax_row(logits.data(), 5) == argmax_row(shifted.data(), 5));
    }
  }
}

TEST_CASE("probs") {
  SUBCASE("zero logits give the uniform distribution") {
    MlpSpec spec{2, {}, 4, 0};
    ModelParams p;
    p.spec = spec;
    p.weights = {std::vector<double>(8, 0.0)};
    p.biases = {std::vector<double>(4, 0.0)};
    const std::vector<double> x{0.3, 0.6};
    for (double v : class_probs(p, x.data(), 1)) {
      CHECK(v == doctest::Approx(0.25).epsilon(1e-15));
    }
  }
  SUBCASE("closed-form softmax at logits [ln 3, 0]") {
    MlpSpec spec{1, {}, 2, 0};
    ModelParams p;
    p.spec = spec;
    p.weights = {{std::log(3.0), 0.0}};
    p.biases = {{0.0, 0.0}};
    const std::vector<double> x{1.0};
    const auto probs = class_probs(p, x.data(), 1);
    CHECK(probs[0] == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(probs[1] == doctest::Approx(0.25).epsilon(1e-12));
  }
  SUBCASE("rows sum to 1 and argmax agrees with predict") {
    std::mt19937_64 rng(7);
    const ModelParams p = tu::random_model(rng, 3, {6}, 4);
    const auto x = tu::random_vector(rng, 30, 0, 1);
    const auto probs = class_probs(p, x.data(), 10);
    const auto preds = predict(p, x, 10);
    for (std::size_t i = 0; i < 10; ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < 4; ++j) {
        CHECK(probs[i * 4 + j] > 0.0);
        sum += probs[i * 4 + j];
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(argmax_row(probs.data() + i * 4, 4) == preds[i]);
    }
  }
}

TEST_CASE("init") {
  SUBCASE("same seed twice gives identical parameters") {
    MlpSpec spec{4, {16}, 3, 1234};
    CHECK(init_params(spec).flatten() == init_params(spec).flatten());
  }
  SUBCASE("biases are zero at init") {
    MlpSpec spec{4, {16}, 3, 1};
    for (const auto& b : init_params(spec).biases) {
      for (double v : b) CHECK(v == 0.0);
    }
  }
  SUBCASE("empirical stddev of a 256-fan-in layer is near sqrt(2/256)") {
    MlpSpec spec{256, {64}, 2, 77};
    const ModelParams p = init_params(spec);
    double ss = 0.0;
    for (double v : p.weights[0]) ss += v * v;
    const double sd = std::sqrt(ss / static_cast<double>(p.weights[0].size()));
    const double expected = std::sqrt(2.0 / 256.0);
    CHECK(sd == doctest::Approx(expected).epsilon(0.10));
  }
}

TEST_CASE("flatten round trip is bitwise") {
  std::mt19937_64 rng(42);
  const ModelParams p = tu::random_model(rng, 5, {7, 3}, 4);
  const auto flat = p.flatten();
  CHECK(flat.size() == p.spec.param_count());
  const ModelParams q = ModelParams::unflatten(p.spec, flat);
  CHECK(q.flatten() == flat);
  CHECK(q.weights == p.weights);
  CHECK(q.biases == p.biases);
  CHECK_THROWS_AS(ModelParams::unflatten(p.spec, std::vector<double>(3)),
                  ShapeError);
}

TEST_CASE("taped forward matches the value-only path") {
  std::mt19937_64 rng(17);
  const ModelParams p = tu::random_model(rng, 4, {8, 8}, 3);
  const auto x = tu::random_vector(rng, 4 * 6, 0, 1);
  Tape tape;
  const Tensor taped = mlp_forward(lift_trainable(tape, p), Tensor({6, 4}, x));
  CHECK(taped.data() == forward_logits(p, x.data(), 6));
}

TEST_CASE("checkpoint round trip and corruption errors") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "arow_ckpt_test";
  fs::create_directories(dir);
  const std::string path = (dir / "model.ckpt").string();

  std::mt19937_64 rng(1);
  const ModelParams p = tu::random_model(rng, 3, {5}, 2);
  save_checkpoint(path, p);
  const ModelParams q = load_checkpoint(path);
  CHECK(q.spec.input_dim == p.spec.input_dim);
  CHECK(q.spec.hidden == p.spec.hidden);
  CHECK(q.spec.classes == p.spec.classes);
  CHECK(q.spec.seed == p.spec.seed);
  CHECK(q.flatten() == p.flatten());

  SUBCASE("bad magic") {
    auto bytes = read_file(path);
    bytes[0] = 'X';
    write_file_atomic(path, bytes);
    CHECK_THROWS_WITH_AS(load_checkpoint(path), doctest::Contains("bad magic"),
                         ParseError);
  }
  SUBCASE("truncated file") {
    auto bytes = read_file(path);
    bytes.resize(bytes.size() / 2);
    write_file_atomic(path, bytes);
    CHECK_THROWS_WITH_AS(load_checkpoint(path), doctest::Contains("truncated"),
                         ParseError);
  }
  SUBCASE("trailing garbage") {
    auto bytes = read_file(path);
    bytes += "junk";
    write_file_atomic(path, bytes);
    CHECK_THROWS_WITH_AS(load_checkpoint(path), doctest::Contains("trailing"),
                         ParseError);
  }
  fs::remove_all(dir);
}
