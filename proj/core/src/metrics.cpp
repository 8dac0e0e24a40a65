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
#include "arow/metrics.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "arow/error.hpp"
#include "arow/io_util.hpp"

namespace arow {

namespace {

std::vector<char> robust_rows(const ModelParams& model, const Dataset& data,
                              const AttackConfig& attack, std::mt19937_64& rng,
                              int restarts) {
  if (restarts < 1) throw ConfigError("robust_accuracy: restarts must be >= 1");
  std::vector<char> robust(data.size(), 1);
  for (int r = 0; r < restarts; ++r) {
    const AttackOutput out =
        pgd_attack(model, data.inputs, data.labels, data.size(), attack, rng);
    const auto preds = predict(model, out.x_adv, data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (preds[i] != data.labels[i]) robust[i] = 0;
    }
  }
  return robust;
}

FairnessReport fairness_from_correct(const Dataset& data,
                                     const std::vector<char>& correct) {
  FairnessReport rep;
  rep.class_counts.assign(data.classes, 0);
  rep.class_correct.assign(data.classes, 0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    rep.class_counts[data.labels[i]] += 1;
    rep.class_correct[data.labels[i]] += correct[i] ? 1 : 0;
  }
  for (std::size_t c = 0; c < data.classes; ++c) {
    if (rep.class_counts[c] == 0) {
      throw DomainError(fmt::format("fairness_metrics: class {} has no samples", c));
    }
    rep.per_class.push_back(static_cast<double>(rep.class_correct[c]) /
                            static_cast<double>(rep.class_counts[c]));
  }
  rep.worst_class = *std::min_element(rep.per_class.begin(), rep.per_class.end());
  double mean_acc = 0.0;
  for (double a : rep.per_class) mean_acc += a;
  mean_acc /= static_cast<double>(data.classes);
  double var = 0.0;
  for (double a : rep.per_class) var += (a - mean_acc) * (a - mean_acc);
  rep.sd = std::sqrt(var / static_cast<double>(data.classes));
  return rep;
}

}  // namespace

double standard_accuracy(const ModelParams& model, const Dataset& data) {
  data.validate();
  const auto preds = predict(model, data.inputs, data.size());
  std::size_t hit = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    hit += preds[i] == data.labels[i] ? 1 : 0;
  }
  return static_cast<double>(hit) / static_cast<double>(data.size());
}

double robust_accuracy(const ModelParams& model, const Dataset& data,
                       const AttackConfig& attack, std::mt19937_64& rng,
                       int restarts) {
  data.validate();
  const auto robust = robust_rows(model, data, attack, rng, restarts);
  std::size_t hit = 0;
  for (char r : robust) hit += r ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(data.size());
}

FairnessReport fairness_standard(const ModelParams& model, const Dataset& data) {
  data.validate();
  const auto preds = predict(model, data.inputs, data.size());
  std::vector<char> correct(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    correct[i] = preds[i] == data.labels[i] ? 1 : 0;
  }
  return fairness_from_correct(data, correct);
}

FairnessReport fairness_robust(const ModelParams& model, const Dataset& data,
                               const AttackConfig& attack, std::mt19937_64& rng,
                               int restarts) {
  data.validate();
  return fairness_from_correct(data,
                               robust_rows(model, data, attack, rng, restarts));
}

BucketTable robustness_buckets(const ModelParams& reference,
                               const ModelParams& eval_model,
                               const Dataset& data, const AttackConfig& attack,
                               std::mt19937_64& rng) {
  data.validate();
  if (!reference.spec.same_dims(eval_model.spec)) {
    throw ConfigError("robustness_buckets: reference and eval models disagree on dims");
  }

  // Bucket assignment: reference model's confidence in the true class at its
  // own adversarial examples.
  const AttackOutput ref_out =
      pgd_attack(reference, data.inputs, data.labels, data.size(), attack, rng);
  const auto ref_probs = class_probs(reference, ref_out.x_adv.data(), data.size());

  // Eval-model robustness on that row's eval-model adversarial example.
  const AttackOutput eval_out =
      pgd_attack(eval_model, data.inputs, data.labels, data.size(), attack, rng);
  const auto eval_preds = predict(eval_model, eval_out.x_adv, data.size());

  BucketTable table;
  const std::size_t c = data.classes;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double p = ref_probs[i * c + data.labels[i]];
    std::size_t bucket = 3;
    for (std::size_t t = 0; t < kBucketThresholds.size(); ++t) {
      if (p < kBucketThresholds[t]) {
        bucket = t;
        break;
      }
    }
    table.size[bucket] += 1;
    if (eval_preds[i] == data.labels[i]) table.robust[bucket] += 1;
  }
  return table;
}

EvalReport evaluate(const ModelParams& model, const Dataset& data,
                    const AttackConfig& attack, std::uint64_t seed, int restarts,
                    const ModelParams* bucket_reference) {
  EvalReport rep;
  rep.std_acc = standard_accuracy(model, data);
  {
    std::mt19937_64 rng(seed);
    rep.rob_acc = robust_accuracy(model, data, attack, rng, restarts);
  }
  rep.fairness_std = fairness_standard(model, data);
  {
    std::mt19937_64 rng(seed);
    rep.fairness_rob = fairness_robust(model, data, attack, rng, restarts);
  }
  if (bucket_reference) {
    std::mt19937_64 rng(seed);
    rep.buckets = robustness_buckets(*bucket_reference, model, data, attack, rng);
  }
  return rep;
}

std::string eval_report_to_csv(const EvalReport& report,
                               const std::vector<std::string>& comment_lines) {
  std::string out;
  for (const auto& line : comment_lines) out += fmt::format("# {}\n", line);
  out += "scope,class,count,std_acc,rob_acc,wc_acc_std,sd_std,wc_acc_rob,sd_rob\n";
  std::size_t total = 0;
  for (std::size_t n : report.fairness_std.class_counts) total += n;
  out += fmt::format("aggregate,,{},{},{},{},{},{},{}\n", total,
                     format_double(report.std_acc), format_double(report.rob_acc),
                     format_double(report.fairness_std.worst_class),
                     format_double(report.fairness_std.sd),
                     format_double(report.fairness_rob.worst_class),
                     format_double(report.fairness_rob.sd));
  for (std::size_t c = 0; c < report.fairness_std.per_class.size(); ++c) {
    out += fmt::format("class,{},{},{},{},,,,\n", c,
                       report.fairness_std.class_counts[c],
                       format_double(report.fairness_std.per_class[c]),
                       format_double(report.fairness_rob.per_class[c]));
  }
  return out;
}

std::string bucket_table_to_csv(const BucketTable& table,
                                const std::vector<std::string>& comment_lines) {
  static const char* kRanges[4] = {"[0,0.3)", "[0.3,0.5)", "[0.5,0.7)", "[0.7,1]"};
  std::string out;
  for (const auto& line : comment_lines) out += fmt::format("# {}\n", line);
  out += "bucket,range,size,robust\n";
  for (std::size_t b = 0; b < 4; ++b) {
    out += fmt::format("{},{},{},{}\n", b, kRanges[b], table.size[b],
                       table.robust[b]);
  }
  return out;
}

}  // namespace arow
