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
#include <random>
#include <string>
#include <vector>

#include "arow/attack.hpp"
#include "arow/data.hpp"
#include "arow/model.hpp"

namespace arow {

double standard_accuracy(const ModelParams& model, const Dataset& data);

/// Fraction of rows still classified correctly after the attack. With
/// restarts > 1, a row counts as robust only if it survives every restart.
double robust_accuracy(const ModelParams& model, const Dataset& data,
                       const AttackConfig& attack, std::mt19937_64& rng,
                       int restarts = 1);

/// Per-class accuracies with the fairness aggregates: worst-class accuracy
/// and the population standard deviation over classes.
struct FairnessReport {
  std::vector<std::size_t> class_counts;
  std::vector<std::size_t> class_correct;
  std::vector<double> per_class;  ///< Acc(c)
  double worst_class = 0.0;       ///< min_c Acc(c)
  double sd = 0.0;                ///< sqrt(mean (Acc(c) - mean)^2)
};

FairnessReport fairness_standard(const ModelParams& model, const Dataset& data);
FairnessReport fairness_robust(const ModelParams& model, const Dataset& data,
                               const AttackConfig& attack, std::mt19937_64& rng,
                               int restarts = 1);

/// Sample groups by the reference model's adversarial confidence
/// p_ref(y | x_adv_ref): [0, 0.3), [0.3, 0.5), [0.5, 0.7), [0.7, 1].
inline constexpr std::array<double, 3> kBucketThresholds = {0.3, 0.5, 0.7};

struct BucketTable {
  std::array<std::size_t, 4> size{};
  std::array<std::size_t, 4> robust{};  ///< rows robust under the eval model
};

BucketTable robustness_buckets(const ModelParams& reference,
                               const ModelParams& eval_model,
                               const Dataset& data, const AttackConfig& attack,
                               std::mt19937_64& rng);

/// Everything cmd-eval reports, from a single computation.
struct EvalReport {
  double std_acc = 0.0;
  double rob_acc = 0.0;
  FairnessReport fairness_std;
  FairnessReport fairness_rob;
  std::optional<BucketTable> buckets;
};

EvalReport evaluate(const ModelParams& model, const Dataset& data,
                    const AttackConfig& attack, std::uint64_t seed,
                    int restarts = 1,
                    const ModelParams* bucket_reference = nullptr);

std::string eval_report_to_csv(const EvalReport& report,
                               const std::vector<std::string>& comment_lines);
std::string bucket_table_to_csv(const BucketTable& table,
                                const std::vector<std::string>& comment_lines);

}  // namespace arow
