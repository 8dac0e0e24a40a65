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

#include "arow/attack.hpp"
#include "testutil.hpp"

using namespace arow;
namespace tu = arow::testutil;

namespace {

// Binary linear model with logits [w.x + b, 0].
ModelParams linear_binary(std::vector<double> w, double b = 0.0) {
  ModelParams p;
  p.spec = MlpSpec{w.size(), {}, 2, 0};
  std::vector<double> W(w.size() * 2, 0.0);
  for (std::size_t j = 0; j < w.size(); ++j) W[j * 2] = w[j];
  p.weights = {std::move(W)};
  p.biases = {{b, 0.0}};
  return p;
}

AttackConfig basic_cfg(double eps, double eta, int steps,
                       Surrogate s = Surrogate::kCrossEntropy,
                       bool random_init = false) {
  AttackConfig cfg;
  cfg.epsilon = eps;
  cfg.eta = eta;
  cfg.steps = steps;
  cfg.surrogate = s;
  cfg.random_init = random_init;
  cfg.clamp_box = {{0.0, 1.0}};
  return cfg;
}

}  // namespace

TEST_CASE("config validation") {
  CHECK_THROWS_AS(basic_cfg(-0.1, 0.1, 1).validate(), ConfigError);
  CHECK_THROWS_AS(basic_cfg(0.1, 0.0, 1).validate(), ConfigError);
  AttackConfig inverted = basic_cfg(0.1, 0.1, 1);
  inverted.clamp_box = {{1.0, 0.0}};
  CHECK_THROWS_AS(inverted.validate(), ConfigError);
  CHECK_NOTHROW(basic_cfg(0.1, 0.1, 0).validate());  // steps 0 needs no eta
}

TEST_CASE("zero steps returns the initialization point") {
  std::mt19937_64 rng(3);
  const ModelParams model = tu::random_model(rng, 3, {8}, 2);
  const auto x = tu::random_vector(rng, 6, 0.2, 0.8);
  const std::vector<int> y{0, 1};
  SUBCASE("deterministic start: exactly x") {
    std::mt19937_64 arng(1);
    const auto out = pgd_attack(model, x, y, 2, basic_cfg(0.1, 0.05, 0), arng);
    CHECK(out.x_adv == x);
    CHECK(out.traces[0].step_preds.empty());
  }
  SUBCASE("random start stays inside ball and box") {
    std::mt19937_64 arng(1);
    const auto out = pgd_attack(model, x, y, 2,
                                basic_cfg(0.1, 0.05, 0, Surrogate::kCrossEntropy,
                                          true),
                                arng);
    for (std::size_t i = 0; i < x.size(); ++i) {
      CHECK(std::abs(out.x_adv[i] - x[i]) <= 0.1 + 1e-12);
      CHECK(out.x_adv[i] >= 0.0);
      CHECK(out.x_adv[i] <= 1.0);
    }
  }
}

TEST_CASE("epsilon 0 returns x bitwise") {
  std::mt19937_64 rng(5);
  const ModelParams model = tu::random_model(rng, 2, {4}, 2);
  const auto x = tu::random_vector(rng, 8, 0.1, 0.9);
  const std::vector<int> y{0, 1, 0, 1};
  std::mt19937_64 arng(2);
  const auto out = pgd_attack(model, x, y, 4,
                              basic_cfg(0.0, 0.05, 7, Surrogate::kCrossEntropy,
                                        true),
                              arng);
  CHECK(out.x_adv == x);
}

TEST_CASE("single CE step on a linear model lands on the analytic corner") {
  // f(x) = [w.x, 0], y = 0: the CE gradient w.r.t. x is -(1 - p0) w, so the
  // ascent step moves by -eta per coordinate where w > 0 (exact sign
  // pattern), then projects to the epsilon corner when eta >= epsilon.
  const ModelParams model = linear_binary({1.5, -2.0, 0.5});
  const std::vector<double> x{0.5, 0.5, 0.5};
  const std::vector<int> y{0};
  const double eps = 0.1;
  std::mt19937_64 arng(1);
  const auto out = pgd_attack(model, x, y, 1, basic_cfg(eps, 0.25, 1), arng);
  CHECK(out.x_adv[0] == 0.5 - eps);  // sign(w0) = +, loss increases downhill
  CHECK(out.x_adv[1] == 0.5 + eps);
  CHECK(out.x_adv[2] == 0.5 - eps);
}

TEST_CASE("sign(0) moves nothing") {
  const ModelParams model = linear_binary({1.0, 0.0});  // zero-weight coordinate
  const std::vector<double> x{0.5, 0.5};
  const std::vector<int> y{0};
  std::mt19937_64 arng(1);
  const auto out = pgd_attack(model, x, y, 1, basic_cfg(0.1, 0.5, 1), arng);
  CHECK(out.x_adv[1] == 0.5);
}

TEST_CASE("ball containment and box clamp over random attacks") {
  std::mt19937_64 rng(10);
  for (int t = 0; t < 20; ++t) {
    const ModelParams model = tu::random_model(rng, 3, {6}, 3);
    const std::size_t b = 5;
    const auto x = tu::random_vector(rng, 3 * b, 0.0, 1.0);
    const auto y = tu::random_labels(rng, b, 3);
    const double eps = 0.02 + 0.1 * (t % 5);
    const auto cfg = basic_cfg(eps, eps / 3.0, 5,
                               t % 2 ? Surrogate::kKlToClean
                                     : Surrogate::kCrossEntropy,
                               true);
    std::mt19937_64 arng(100 + t);
    const auto out = pgd_attack(model, x, y, b, cfg, arng);
    for (std::size_t i = 0; i < x.size(); ++i) {
      CHECK(std::abs(out.x_adv[i] - x[i]) <= eps + 1e-12);
      CHECK(out.x_adv[i] >= 0.0);
      CHECK(out.x_adv[i] <= 1.0);
    }
  }
}

TEST_CASE("determinism: fixed rng seed gives bitwise-identical output") {
  std::mt19937_64 rng(22);
  const ModelParams model = tu::random_model(rng, 4, {8}, 2);
  const auto x = tu::random_vector(rng, 4 * 6, 0.0, 1.0);
  const auto y = tu::random_labels(rng, 6, 2);
  const auto cfg = basic_cfg(0.05, 0.0125, 10, Surrogate::kKlToClean, true);
  std::mt19937_64 a1(777), a2(777);
  const auto o1 = pgd_attack(model, x, y, 6, cfg, a1);
  const auto o2 = pgd_attack(model, x, y, 6, cfg, a2);
  CHECK(o1.x_adv == o2.x_adv);
}

TEST_CASE("monotone containment: smaller-ball output stays in the larger ball") {
  std::mt19937_64 rng(13);
  const ModelParams model = tu::random_model(rng, 2, {8}, 2);
  const auto x = tu::random_vector(rng, 2 * 8, 0.1, 0.9);
  const auto y = tu::random_labels(rng, 8, 2);
  const double eps_small = 0.03, eps_large = 0.08;
  std::mt19937_64 arng(5);
  const auto out = pgd_attack(model, x, y, 8,
                              basic_cfg(eps_small, 0.01, 8), arng);
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(std::abs(out.x_adv[i] - x[i]) <= eps_large + 1e-12);
  }
}

TEST_CASE("CE attack with nonzero gradient moves at step 1") {
  std::mt19937_64 rng(31);
  const ModelParams model = tu::random_model(rng, 3, {8}, 2);
  const auto x = tu::random_vector(rng, 3, 0.3, 0.7);
  std::mt19937_64 arng(1);
  const auto out =
      pgd_attack(model, x, {0}, 1, basic_cfg(0.05, 0.02, 1), arng);
  // random He-initialized models have nonzero input gradients
  CHECK(out.x_adv != x);
}

TEST_CASE("KL surrogate with deterministic start stalls by design") {
  // At x' = x the KL gradient is exactly zero; with random init off the
  // first step cannot move. This is the documented degenerate start.
  std::mt19937_64 rng(37);
  const ModelParams model = tu::random_model(rng, 3, {8}, 2);
  const auto x = tu::random_vector(rng, 3, 0.3, 0.7);
  std::mt19937_64 arng(1);
  const auto out = pgd_attack(model, x, {0}, 1,
                              basic_cfg(0.05, 0.02, 1, Surrogate::kKlToClean),
                              arng);
  CHECK(out.x_adv == x);
}

TEST_CASE("traces and gair_kappa") {
  SUBCASE("never misclassified caps at steps") {
    PgdTrace tr;
    tr.initial_pred = 1;
    tr.step_preds.assign(10, 1);
    CHECK(gair_kappa(tr, 10) == 10);
  }
  SUBCASE("misclassified at the initialization point gives 0") {
    PgdTrace tr;
    tr.initial_pred = 0;
    tr.step_preds.assign(10, 0);
    tr.first_flip = 0;
    CHECK(gair_kappa(tr, 10) == 0);
  }
  SUBCASE("first flip at step 4") {
    PgdTrace tr;
    tr.step_preds.assign(10, 1);
    tr.first_flip = 4;
    CHECK(gair_kappa(tr, 10) == 4);
  }
  SUBCASE("trace length must match the step budget") {
    PgdTrace tr;
    tr.step_preds.assign(3, 1);
    CHECK_THROWS_AS(gair_kappa(tr, 10), ShapeError);
  }
  SUBCASE("attack traces satisfy the first-flip definition") {
    std::mt19937_64 rng(91);
    const ModelParams model = tu::random_model(rng, 2, {10}, 2);
    const auto x = tu::random_vector(rng, 2 * 20, 0.0, 1.0);
    const auto y = tu::random_labels(rng, 20, 2);
    std::mt19937_64 arng(8);
    const auto out = pgd_attack(model, x, y, 20,
                                basic_cfg(0.15, 0.05, 6, Surrogate::kCrossEntropy,
                                          true),
                                arng);
    for (std::size_t i = 0; i < 20; ++i) {
      const PgdTrace& tr = out.traces[i];
      REQUIRE(tr.step_preds.size() == 6);
      if (tr.first_flip) {
        if (*tr.first_flip == 0) {
          CHECK(tr.initial_pred != y[i]);
        } else {
          CHECK(tr.initial_pred == y[i]);
          for (int m = 1; m < *tr.first_flip; ++m) {
            CHECK(tr.step_preds[m - 1] == y[i]);
          }
          CHECK(tr.step_preds[*tr.first_flip - 1] != y[i]);
        }
      } else {
        CHECK(tr.initial_pred == y[i]);
        for (int p : tr.step_preds) CHECK(p == y[i]);
      }
    }
  }
}

TEST_CASE("early_stopped_pgd") {
  std::mt19937_64 rng(55);
  const ModelParams model = tu::random_model(rng, 2, {12}, 2);
  const auto x = tu::random_vector(rng, 2 * 16, 0.0, 1.0);
  const auto y = tu::random_labels(rng, 16, 2);
  const auto cfg = basic_cfg(0.2, 0.05, 10, Surrogate::kCrossEntropy, true);

  SUBCASE("overshoot = steps reproduces full PGD bitwise") {
    std::mt19937_64 a1(4), a2(4);
    const auto full = pgd_attack(model, x, y, 16, cfg, a1);
    const auto fat = early_stopped_pgd(model, x, y, 16, cfg, cfg.steps, a2);
    CHECK(fat == full.x_adv);
  }
  SUBCASE("never-misclassified rows match full PGD output") {
    std::mt19937_64 a1(4), a2(4);
    const auto full = pgd_attack(model, x, y, 16, cfg, a1);
    const auto fat = early_stopped_pgd(model, x, y, 16, cfg, 2, a2);
    for (std::size_t i = 0; i < 16; ++i) {
      if (!full.traces[i].first_flip) {
        for (std::size_t j = 0; j < 2; ++j) {
          CHECK(fat[i * 2 + j] == full.x_adv[i * 2 + j]);
        }
      }
    }
  }
  SUBCASE("a row flipped at step 2 with K = 2 stops after 4 updates") {
    // f(x) = [4 x0 - 1.8, 0], y = 0: the walk 0.5 -> 0.45 -> 0.40 flips at
    // step 2 (logit -0.2), so FAT freezes after step 4 at 0.30 while full
    // PGD continues to the ball boundary 0.20.
    const ModelParams lin = linear_binary({4.0, 0.0}, -1.8);
    const std::vector<double> x0{0.5, 0.5};
    auto c = basic_cfg(0.3, 0.05, 10);
    std::mt19937_64 a1(1);
    const auto fat = early_stopped_pgd(lin, x0, {0}, 1, c, 2, a1);
    CHECK(fat[0] == doctest::Approx(0.30).epsilon(1e-12));
    std::mt19937_64 a2(1);
    const auto full = pgd_attack(lin, x0, {0}, 1, c, a2);
    CHECK(full.x_adv[0] == doctest::Approx(0.20).epsilon(1e-12));
    CHECK(full.traces[0].first_flip.value_or(-1) == 2);
    CHECK(fat[0] > full.x_adv[0]);
  }
  SUBCASE("overshoot outside [0, steps] rejected") {
    std::mt19937_64 a(1);
    CHECK_THROWS_AS(early_stopped_pgd(model, x, y, 16, cfg, -1, a), ConfigError);
    CHECK_THROWS_AS(early_stopped_pgd(model, x, y, 16, cfg, 11, a), ConfigError);
  }
}

TEST_CASE("attack leaves parameters untouched") {
  std::mt19937_64 rng(71);
  const ModelParams model = tu::random_model(rng, 3, {6}, 2);
  const auto before = model.flatten();
  const auto x = tu::random_vector(rng, 3 * 4, 0.0, 1.0);
  const auto y = tu::random_labels(rng, 4, 2);
  std::mt19937_64 arng(3);
  pgd_attack(model, x, y, 4, basic_cfg(0.1, 0.03, 5), arng);
  CHECK(model.flatten() == before);
}
