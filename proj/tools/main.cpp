/*
 * Copyright 2026 The Cloudcast Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

#include "commands.hpp"

namespace {

using cloudcast::cli::GlobalOpts;

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto end = comma == std::string::npos ? text.size() : comma;
    if (end > start) {
      seeds.push_back(std::stoull(text.substr(start, end - start)));
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return seeds;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto end = comma == std::string::npos ? text.size() : comma;
    if (end > start) out.push_back(std::stod(text.substr(start, end - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "cloudcast - probabilistic cloud workload forecasting toolkit"};
  app.require_subcommand(1);

  GlobalOpts g;
  g.argv0 = argv[0];
  std::string run_root;
  std::string config_file;
  app.add_option("--run-root", run_root,
                 "Run directory (the only persistence layer)");
  app.add_option("--config", config_file,
                 "JSON file with default paths/seeds/confidence levels");
  app.add_flag("--force", g.force, "Redo completed steps / override checks");
  app.add_option("--jobs", g.jobs, "Parallel scenario workers")
      ->check(CLI::PositiveNumber);

  cloudcast::cli::PreprocessOpts pre;
  auto* c_pre = app.add_subcommand(
      "preprocess", "Aggregate usage events into a 5-minute demand trace");
  c_pre->add_option("--events", pre.events, "Event CSV")->required();
  c_pre->add_option("--cluster-id", pre.cluster_id)->required();
  c_pre->add_option("--schema", pre.schema,
                    "canonical | google | alibaba_gpu");
  c_pre->add_option("--window", pre.window_seconds, "Window seconds");
  c_pre->add_option("--t0", pre.t0, "Grid start (epoch s)");
  c_pre->add_option("--t1", pre.t1, "Grid end (epoch s)");

  cloudcast::cli::SynthOpts syn;
  auto* c_syn = app.add_subcommand(
      "synth", "Generate a synthetic trace from a JSON spec");
  c_syn->add_option("--spec", syn.spec, "SynthSpec JSON")->required();
  c_syn->add_option("--cluster-id", syn.cluster_id)->required();

  cloudcast::cli::SplitOpts spl;
  auto* c_spl = app.add_subcommand(
      "split", "Scale, window and split a trace into a leak-free bundle");
  c_spl->add_option("--cluster-id", spl.cluster_id)->required();
  c_spl->add_option("--mode", spl.mode, "bivariate | univariate:<resource>");
  c_spl->add_option("--input-len", spl.input_len);
  c_spl->add_option("--horizon", spl.horizon_steps);
  c_spl->add_option("--train-fraction", spl.train_fraction);
  c_spl->add_option("--val-fraction", spl.val_fraction);

  cloudcast::cli::TrainOpts trn;
  std::string trn_seeds = "1";
  auto* c_trn = app.add_subcommand("train", "Train models on one cluster");
  c_trn->add_option("--cluster-id", trn.cluster_id)->required();
  c_trn->add_option("--model", trn.model, "lstm | lstmd | hbnn");
  c_trn->add_option("--mode", trn.mode);
  c_trn->add_option("--model-config", trn.model_config, "Model config JSON");
  c_trn->add_option("--seed-list,--seeds", trn_seeds, "e.g. 1,2,3");
  c_trn->add_option("--max-epochs", trn.max_epochs);
  c_trn->add_option("--patience", trn.patience);

  cloudcast::cli::ScenarioOpts sc;
  std::string sc_seeds;
  auto* c_sc = app.add_subcommand(
      "scenario", "Run a pretraining/fine-tuning scenario for a target");
  c_sc->add_option("--scenario", sc.scenario,
                   "all | all_ft | all_but_one | all_but_one_ft | gc19 | "
                   "gc19_ft | gc19_but_one | gc19_but_one_ft | random");
  c_sc->add_option("--target-cluster", sc.target_cluster);
  c_sc->add_option("--model", sc.model, "lstm | lstmd | hbnn");
  c_sc->add_option("--mode", sc.mode);
  c_sc->add_option("--scenario-spec", sc.scenario_spec, "ScenarioSpec JSON");
  c_sc->add_option("--model-config", sc.model_config);
  c_sc->add_option("--seed-list,--seeds", sc_seeds);
  c_sc->add_option("--max-epochs", sc.max_epochs);
  c_sc->add_option("--patience", sc.patience);
  c_sc->add_option("--ft-epochs", sc.ft_epochs);
  c_sc->add_option("--ft-patience", sc.ft_patience);
  c_sc->add_option("--ft-lr", sc.ft_lr);

  cloudcast::cli::EvaluateOpts ev;
  std::string ev_conf;
  auto* c_ev = app.add_subcommand(
      "evaluate", "Compute point/QoS/calibration metrics for a run");
  c_ev->add_option("--run-dir", ev.run_dir)->required();
  c_ev->add_option("--confidence", ev_conf, "e.g. 95,97,99");
  c_ev->add_flag("--pinball", ev.pinball,
                 "Also emit the asymmetric pinball score");
  c_ev->add_flag("--raw", ev.raw, "Also report metrics in raw units");
  c_ev->add_option("--compare-run-dir", ev.compare_run_dir,
                   "Second run for the Diebold-Mariano test");

  cloudcast::cli::BenchOpts bn;
  std::string bn_fracs, bn_steps;
  auto* c_bn = app.add_subcommand(
      "bench", "Measure training/fine-tuning/inference wall time");
  c_bn->add_option("--cluster-id", bn.cluster_id)->required();
  c_bn->add_option("--model", bn.model);
  c_bn->add_option("--mode", bn.mode);
  c_bn->add_option("--model-config", bn.model_config);
  c_bn->add_option("--repetitions", bn.repetitions);
  c_bn->add_option("--fractions", bn_fracs, "e.g. 0.2,0.4,0.6,0.8");
  c_bn->add_option("--steps", bn_steps, "e.g. 6,12,18,24");
  c_bn->add_option("--max-epochs", bn.max_epochs, "Epochs per timed run");
  c_bn->add_option("--seed", bn.seed);

  cloudcast::cli::ReportOpts rp;
  app.add_subcommand("report",
                     "Aggregate persisted metrics into tables and plots");

  CLI11_PARSE(app, argc, argv);

  try {
    // --config provides defaults; explicit flags win.
    if (!config_file.empty()) {
      std::ifstream in(config_file);
      if (!in) {
        std::cerr << "cannot open config: " << config_file << '\n';
        return 1;
      }
      nlohmann::json j;
      in >> j;
      if (run_root.empty() && j.contains("run_root")) {
        run_root = j.at("run_root").get<std::string>();
      }
      if (trn_seeds == "1" && j.contains("seeds")) {
        trn_seeds.clear();
        for (const auto& s : j.at("seeds")) {
          if (!trn_seeds.empty()) trn_seeds += ',';
          trn_seeds += std::to_string(s.get<std::uint64_t>());
        }
        if (sc_seeds.empty()) sc_seeds = trn_seeds;
      }
      if (ev_conf.empty() && j.contains("confidence")) {
        for (const auto& c : j.at("confidence")) {
          if (!ev_conf.empty()) ev_conf += ',';
          ev_conf += std::to_string(c.get<double>());
        }
      }
      if (trn.model_config.empty() && j.contains("model_config")) {
        trn.model_config = j.at("model_config").get<std::string>();
        sc.model_config = trn.model_config;
        bn.model_config = trn.model_config;
      }
      if (sc.scenario_spec.empty() && j.contains("scenario_spec")) {
        sc.scenario_spec = j.at("scenario_spec").get<std::string>();
      }
    }
    if (run_root.empty()) {
      std::cerr << "--run-root is required (flag or config file)\n";
      return 1;
    }
    g.run_root = run_root;

    trn.seeds = parse_seed_list(trn_seeds);
    if (!sc_seeds.empty()) sc.seeds = parse_seed_list(sc_seeds);
    if (!ev_conf.empty()) ev.confidences = parse_double_list(ev_conf);
    if (!bn_fracs.empty()) bn.fractions = parse_double_list(bn_fracs);
    if (!bn_steps.empty()) {
      bn.steps.clear();
      for (const double v : parse_double_list(bn_steps)) {
        bn.steps.push_back(static_cast<int>(v));
      }
    }

    if (c_pre->parsed()) return cloudcast::cli::cmd_preprocess(g, pre);
    if (c_syn->parsed()) return cloudcast::cli::cmd_synth(g, syn);
    if (c_spl->parsed()) return cloudcast::cli::cmd_split(g, spl);
    if (c_trn->parsed()) return cloudcast::cli::cmd_train(g, trn);
    if (c_sc->parsed()) return cloudcast::cli::cmd_scenario(g, sc);
    if (c_ev->parsed()) return cloudcast::cli::cmd_evaluate(g, ev);
    if (c_bn->parsed()) return cloudcast::cli::cmd_bench(g, bn);
    return cloudcast::cli::cmd_report(g, rp);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
