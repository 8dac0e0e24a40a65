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
//
// Experiment runner: train / eval / verify-bounds / sweep, driven by one
// JSON config file. Exit codes: 0 ok, 2 config error, 3 runtime error,
// 4 bound violation.

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "arow/checkpoint.hpp"
#include "arow/config.hpp"
#include "arow/error.hpp"
#include "arow/io_util.hpp"
#include "arow/metrics.hpp"
#include "arow/risk_oracle.hpp"
#include "arow/train.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitBoundViolation = 4;

struct CommonArgs {
  std::string config_path;
  std::string out_override;
  std::optional<std::uint64_t> seed_override;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "run config (JSON)")
      ->required();
  cmd->add_option("--out", args.out_override, "output directory override");
  cmd->add_option("--seed", args.seed_override, "seed override");
  cmd->add_flag("--quiet", args.quiet, "suppress progress output");
}

arow::RunConfig load_config(const CommonArgs& args) {
  arow::RunConfig cfg = arow::load_run_config(args.config_path);
  if (!args.out_override.empty()) cfg.output_dir = args.out_override;
  if (args.seed_override) cfg.seed = *args.seed_override;
  if (cfg.output_dir.empty()) {
    throw arow::ConfigError("config: output_dir missing (or pass --out)");
  }
  return cfg;
}

std::string out_path(const arow::RunConfig& cfg, const std::string& name) {
  return (std::filesystem::path(cfg.output_dir) / name).string();
}

std::vector<std::string> provenance_lines(const arow::RunConfig& cfg,
                                          const std::string& dataset_digest) {
  return {fmt::format("config={}", arow::config_to_json(cfg).dump()),
          fmt::format("dataset_digest={}", dataset_digest)};
}

json provenance_json(const arow::RunConfig& cfg,
                     const std::string& dataset_digest) {
  return json{{"config", arow::config_to_json(cfg)},
              {"dataset_digest", dataset_digest}};
}

std::string timestamp_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

const arow::ModelParams* resolve_pretrained(
    const arow::RunConfig& cfg, std::optional<arow::ModelParams>& storage) {
  if (!cfg.objective.pretrained) return nullptr;
  storage = arow::load_checkpoint(*cfg.objective.pretrained);
  if (!storage->spec.same_dims(cfg.model)) {
    throw arow::ConfigError(fmt::format(
        "pretrained checkpoint {} has dims ({} -> {}) incompatible with the "
        "config model ({} -> {})",
        *cfg.objective.pretrained, storage->spec.input_dim,
        storage->spec.classes, cfg.model.input_dim, cfg.model.classes));
  }
  return &*storage;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

int cmd_train(const CommonArgs& args) {
  const arow::RunConfig cfg = load_config(args);
  const arow::TrainConfig tc = cfg.train_config();
  auto [train_set, val_set] = arow::build_splits(cfg.dataset);
  const std::string digest = arow::build_dataset(cfg.dataset).digest();

  std::optional<arow::ModelParams> pretrained;
  const arow::ModelParams* pre = resolve_pretrained(cfg, pretrained);

  const arow::ModelParams init = arow::init_params(cfg.model);
  arow::TrainHooks hooks;
  if (!args.quiet) {
    hooks.on_epoch_end = [](const arow::EpochMetrics& m, const arow::ModelParams&) {
      fmt::print("epoch {:>3}  lr {:<8} obj {:<12.6} std {:.4f} rob {:.4f}\n",
                 m.epoch, m.lr, m.objective, m.std_acc, m.rob_acc);
    };
  }
  const arow::TrainResult result =
      arow::train(init, train_set, val_set, tc, pre, &hooks);

  arow::save_checkpoint(out_path(cfg, "checkpoint_final.ckpt"),
                        result.final_params);
  arow::save_checkpoint(out_path(cfg, "checkpoint_best.ckpt"),
                        result.best_params);
  if (result.swa_params) {
    arow::save_checkpoint(out_path(cfg, "checkpoint_swa.ckpt"), *result.swa_params);
  }
  if (result.ema_params) {
    arow::save_checkpoint(out_path(cfg, "checkpoint_ema.ckpt"), *result.ema_params);
  }
  arow::write_file_atomic(out_path(cfg, "metrics.csv"),
                          arow::metrics_to_csv(result.log,
                                               provenance_lines(cfg, digest)));

  json meta;
  meta["provenance"] = provenance_json(cfg, digest);
  meta["best_epoch"] = result.best_epoch;
  meta["final"] = {{"std_acc", result.log.back().std_acc},
                   {"rob_acc", result.log.back().rob_acc},
                   {"objective", result.log.back().objective}};
  meta["checkpoints"] = {{"final", "checkpoint_final.ckpt"},
                         {"best", "checkpoint_best.ckpt"}};
  if (result.swa_params) meta["checkpoints"]["swa"] = "checkpoint_swa.ckpt";
  if (result.ema_params) meta["checkpoints"]["ema"] = "checkpoint_ema.ckpt";
  meta["generated_at"] = timestamp_utc();
  arow::write_file_atomic(out_path(cfg, "metadata.json"), meta.dump(2) + "\n");

  if (!args.quiet) {
    fmt::print("wrote {} (best epoch {})\n", out_path(cfg, "metrics.csv"),
               result.best_epoch);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

int cmd_eval(const CommonArgs& args, const std::string& checkpoint_path) {
  const arow::RunConfig cfg = load_config(args);
  if (!cfg.eval) throw arow::ConfigError("config: eval section missing");
  const arow::ModelParams model = arow::load_checkpoint(checkpoint_path);
  if (!model.spec.same_dims(cfg.model)) {
    throw arow::ConfigError(fmt::format(
        "checkpoint {} dims (input {}, classes {}) do not match the config "
        "model (input {}, classes {})",
        checkpoint_path, model.spec.input_dim, model.spec.classes,
        cfg.model.input_dim, cfg.model.classes));
  }

  auto [train_set, val_set] = arow::build_splits(cfg.dataset);
  (void)train_set;
  const std::string digest = arow::build_dataset(cfg.dataset).digest();
  const arow::AttackConfig& attack = cfg.attack(cfg.eval->attack_name);

  std::optional<arow::ModelParams> reference;
  const arow::ModelParams* ref = nullptr;
  if (cfg.eval->bucket_reference) {
    reference = arow::load_checkpoint(*cfg.eval->bucket_reference);
    ref = &*reference;
  }

  const arow::EvalReport report =
      arow::evaluate(model, val_set, attack, arow::eval_stream_seed(cfg.seed),
                     cfg.eval->restarts, ref);

  const auto comments = provenance_lines(cfg, digest);
  arow::write_file_atomic(out_path(cfg, "eval_report.csv"),
                          arow::eval_report_to_csv(report, comments));

  json jrep;
  jrep["provenance"] = provenance_json(cfg, digest);
  jrep["std_acc"] = report.std_acc;
  jrep["rob_acc"] = report.rob_acc;
  jrep["fairness"] = {
      {"standard",
       {{"per_class", report.fairness_std.per_class},
        {"wc_acc", report.fairness_std.worst_class},
        {"sd", report.fairness_std.sd}}},
      {"robust",
       {{"per_class", report.fairness_rob.per_class},
        {"wc_acc", report.fairness_rob.worst_class},
        {"sd", report.fairness_rob.sd}}}};
  if (report.buckets) {
    jrep["buckets"] = {{"size", report.buckets->size},
                       {"robust", report.buckets->robust}};
    arow::write_file_atomic(out_path(cfg, "buckets.csv"),
                            arow::bucket_table_to_csv(*report.buckets, comments));
  }
  arow::write_file_atomic(out_path(cfg, "eval_report.json"), jrep.dump(2) + "\n");

  if (!args.quiet) {
    fmt::print("std_acc {:.4f}  rob_acc {:.4f}\n", report.std_acc, report.rob_acc);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// verify-bounds
// ---------------------------------------------------------------------------

struct TrialOutcome {
  json detail;
  bool violated = false;
  std::size_t audit_rows = 0;
  std::size_t audit_equal = 0;
  std::size_t audit_excluded = 0;
  std::string summary;
};

TrialOutcome check_report(const arow::RiskReport& report, std::size_t classes,
                          const std::string& name) {
  TrialOutcome out;
  const arow::BoundCheck t1 = arow::theorem1_check(report);
  const arow::BoundCheck t2 = arow::theorem2_check(report);
  const bool ok = t1.holds && t2.holds && report.lemma2_holds &&
                  report.decomposition_exact;
  out.violated = !ok;

  // Binary per-row equality audit, skipping near-tie rows.
  if (classes == 2) {
    for (const auto& rec : report.samples) {
      out.audit_rows += 1;
      if (std::abs(rec.max_prob_z - 0.5) < arow::kTieTolerance) {
        out.audit_excluded += 1;
      } else if ((rec.robust_err ? 1 : 0) == rec.theorem1_rhs) {
        out.audit_equal += 1;
      }
    }
  }

  out.detail = json{{"name", name},
                    {"epsilon", report.epsilon},
                    {"grid_points", report.grid_points},
                    {"samples", report.n},
                    {"robust_risk", report.robust_risk},
                    {"natural_risk", report.natural_risk},
                    {"boundary_risk", report.boundary_risk},
                    {"theorem1_rhs", t1.rhs},
                    {"theorem1_holds", t1.holds},
                    {"theorem2_rhs", t2.rhs},
                    {"theorem2_holds", t2.holds},
                    {"lemma2_holds", report.lemma2_holds},
                    {"decomposition_exact", report.decomposition_exact}};
  json rows = json::array();
  for (const auto& rec : report.samples) {
    rows.push_back(json{{"y", rec.label},
                        {"pred", rec.pred_clean},
                        {"z", rec.z},
                        {"pred_z", rec.pred_z},
                        {"p_y_z", rec.p_y_given_z},
                        {"p_y_x", rec.p_y_given_x},
                        {"nat", rec.natural_err},
                        {"bdy", rec.boundary_err},
                        {"rob", rec.robust_err},
                        {"t1_rhs", rec.theorem1_rhs},
                        {"t2_rhs", rec.theorem2_rhs}});
  }
  out.detail["samples_detail"] = rows;
  out.summary = fmt::format(
      "{}: eps={:.6f} rob={:.4f} nat={:.4f} bdy={:.4f} t1_rhs={:.4f} "
      "t2_rhs={:.4f} t1={} t2={} lemma2={} decomp={}",
      name, report.epsilon, report.robust_risk, report.natural_risk,
      report.boundary_risk, t1.rhs, t2.rhs, t1.holds ? "ok" : "VIOLATED",
      t2.holds ? "ok" : "VIOLATED", report.lemma2_holds ? "ok" : "VIOLATED",
      report.decomposition_exact ? "ok" : "VIOLATED");
  return out;
}

int cmd_verify_bounds(const CommonArgs& args) {
  const arow::RunConfig cfg = load_config(args);
  if (!cfg.verify) throw arow::ConfigError("config: verify section missing");
  const arow::VerifySection& v = *cfg.verify;
  const std::array<double, 2> box{0.0, 1.0};

  std::string text;
  json detail = json::array();
  bool any_violation = false;
  std::size_t audit_rows = 0, audit_equal = 0, audit_excluded = 0;

  for (int t = 0; t < v.trials; ++t) {
    std::mt19937_64 rng(arow::mix_seed(cfg.seed, 0x564552494659ULL,
                                       static_cast<std::uint64_t>(t)));
    std::uniform_real_distribution<double> eps_dist(v.epsilon_range[0],
                                                    v.epsilon_range[1]);
    const double eps = eps_dist(rng);

    arow::MlpSpec spec;
    spec.input_dim = v.dim;
    spec.hidden = v.hidden;
    spec.classes = v.classes;
    spec.seed = rng();
    const arow::ModelParams model = arow::init_params(spec);

    arow::Dataset ds;
    ds.dim = v.dim;
    ds.classes = v.classes;
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (std::size_t i = 0; i < v.samples_per_trial; ++i) {
      for (std::size_t j = 0; j < v.dim; ++j) ds.inputs.push_back(uni(rng));
      ds.labels.push_back(static_cast<int>(rng() % v.classes));
    }
    ds.provenance = fmt::format("verify_trial({})", t);

    const arow::RiskReport report =
        arow::empirical_risks(model, ds, eps, v.grid_points, box);
    TrialOutcome outcome =
        check_report(report, v.classes, fmt::format("trial {}", t));
    any_violation |= outcome.violated;
    audit_rows += outcome.audit_rows;
    audit_equal += outcome.audit_equal;
    audit_excluded += outcome.audit_excluded;
    text += outcome.summary + "\n";
    detail.push_back(std::move(outcome.detail));
  }

  if (v.checkpoint) {
    const arow::ModelParams model = arow::load_checkpoint(*v.checkpoint);
    const arow::Dataset ds = arow::build_dataset(cfg.dataset);
    if (ds.dim > 3) {
      throw arow::ConfigError(fmt::format(
          "verify-bounds: dataset dim {} too large for grid checks (max 3)",
          ds.dim));
    }
    const double eps =
        v.epsilon ? *v.epsilon : 0.5 * (v.epsilon_range[0] + v.epsilon_range[1]);
    const arow::RiskReport report =
        arow::empirical_risks(model, ds, eps, v.grid_points, box);
    TrialOutcome outcome =
        check_report(report, model.spec.classes, "checkpoint");
    any_violation |= outcome.violated;
    text += outcome.summary + "\n";
    detail.push_back(std::move(outcome.detail));
  }

  if (v.classes == 2) {
    text += fmt::format(
        "binary equality audit: rows={} equal={} tie_excluded={}\n", audit_rows,
        audit_equal, audit_excluded);
  }
  text += fmt::format("verdict: {}\n", any_violation ? "VIOLATED" : "all bounds hold");

  const std::string digest = fmt::format("trials={} seed={}", v.trials, cfg.seed);
  std::string header;
  for (const auto& line : provenance_lines(cfg, digest)) {
    header += fmt::format("# {}\n", line);
  }
  arow::write_file_atomic(out_path(cfg, "bounds_report.txt"), header + text);

  json jdetail;
  jdetail["provenance"] = provenance_json(cfg, digest);
  jdetail["trials"] = detail;
  if (v.classes == 2) {
    jdetail["binary_audit"] = {{"rows", audit_rows},
                               {"equal", audit_equal},
                               {"tie_excluded", audit_excluded}};
  }
  jdetail["violated"] = any_violation;
  arow::write_file_atomic(out_path(cfg, "bounds_detail.json"),
                          jdetail.dump(2) + "\n");

  if (!args.quiet) fmt::print("{}", text);
  return any_violation ? kExitBoundViolation : kExitOk;
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

int cmd_sweep(const CommonArgs& args, const std::vector<double>& lambdas,
              unsigned jobs) {
  if (lambdas.size() < 2) {
    throw arow::ConfigError("sweep: need at least two lambda values");
  }
  const arow::RunConfig cfg = load_config(args);
  if (!cfg.eval) throw arow::ConfigError("config: eval section missing");
  const arow::TrainConfig base_tc = cfg.train_config();
  auto [train_set, val_set] = arow::build_splits(cfg.dataset);
  const std::string digest = arow::build_dataset(cfg.dataset).digest();
  const arow::AttackConfig& eval_attack = cfg.attack(cfg.eval->attack_name);

  std::optional<arow::ModelParams> pretrained;
  const arow::ModelParams* pre = resolve_pretrained(cfg, pretrained);
  const arow::ModelParams init = arow::init_params(cfg.model);

  struct Row {
    double lambda;
    double std_acc;
    double rob_acc;
  };
  std::vector<Row> rows(lambdas.size());
  std::atomic<std::size_t> next{0};
  std::mutex print_mutex;

  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= lambdas.size()) return;
      arow::TrainConfig tc = base_tc;  // shared seed schedule across points
      tc.objective.lambda = lambdas[i];
      const arow::TrainResult res =
          arow::train(init, train_set, val_set, tc, pre, nullptr);
      std::mt19937_64 rng(arow::eval_stream_seed(cfg.seed));
      Row row;
      row.lambda = lambdas[i];
      row.std_acc = arow::standard_accuracy(res.final_params, val_set);
      row.rob_acc = arow::robust_accuracy(res.final_params, val_set, eval_attack,
                                          rng, cfg.eval->restarts);
      rows[i] = row;
      if (!args.quiet) {
        const std::lock_guard<std::mutex> lock(print_mutex);
        fmt::print("lambda {:<6} std {:.4f} rob {:.4f}\n", row.lambda,
                   row.std_acc, row.rob_acc);
      }
    }
  };

  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::string csv;
  for (const auto& line : provenance_lines(cfg, digest)) {
    csv += fmt::format("# {}\n", line);
  }
  csv += "lambda,std_acc,rob_acc\n";
  for (const Row& r : rows) {
    csv += fmt::format("{},{},{}\n", arow::format_double(r.lambda),
                       arow::format_double(r.std_acc),
                       arow::format_double(r.rob_acc));
  }
  arow::write_file_atomic(out_path(cfg, "sweep.csv"), csv);

  json meta;
  meta["provenance"] = provenance_json(cfg, digest);
  meta["lambdas"] = lambdas;
  meta["generated_at"] = timestamp_utc();
  arow::write_file_atomic(out_path(cfg, "metadata.json"), meta.dump(2) + "\n");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adversarial-training laboratory"};
  app.require_subcommand(1);

  CommonArgs train_args;
  CLI::App* train_cmd = app.add_subcommand("train", "train a model per config");
  add_common(train_cmd, train_args);

  CommonArgs eval_args;
  std::string eval_checkpoint;
  CLI::App* eval_cmd =
      app.add_subcommand("eval", "evaluate a checkpoint on the held-out split");
  add_common(eval_cmd, eval_args);
  eval_cmd->add_option("--checkpoint", eval_checkpoint, "model checkpoint")
      ->required();

  CommonArgs verify_args;
  CLI::App* verify_cmd = app.add_subcommand(
      "verify-bounds", "brute-force bound checks on random and trained models");
  add_common(verify_cmd, verify_args);

  CommonArgs sweep_args;
  std::vector<double> lambdas;
  unsigned jobs = 1;
  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "lambda sweep emitting a trade-off CSV");
  add_common(sweep_cmd, sweep_args);
  sweep_cmd->add_option("--lambdas", lambdas, "lambda values (>= 2)")
      ->required()
      ->delimiter(',');
  sweep_cmd->add_option("--jobs", jobs, "parallel training workers");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(train_args);
    if (eval_cmd->parsed()) return cmd_eval(eval_args, eval_checkpoint);
    if (verify_cmd->parsed()) return cmd_verify_bounds(verify_args);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep_args, lambdas, jobs);
  } catch (const arow::ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kExitConfig;
  } catch (const arow::ParseError& e) {
    fmt::print(stderr, "parse error: {}\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitRuntime;
  }
  return kExitConfig;
}
