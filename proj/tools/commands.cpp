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

#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <thread>

#include "cloudcast/artifacts.hpp"
#include "cloudcast/bench.hpp"
#include "cloudcast/errors.hpp"
#include "cloudcast/metrics.hpp"
#include "cloudcast/model.hpp"
#include "cloudcast/report.hpp"
#include "cloudcast/scenarios.hpp"
#include "cloudcast/synth.hpp"
#include "cloudcast/trace_io.hpp"
#include "cloudcast/windowing.hpp"

namespace cloudcast::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void notice(const std::string& msg) {
  std::cout << "[cloudcast] " << msg << '\n';
}

bool deterministic_mode() {
  const char* v = std::getenv("CLOUDCAST_DETERMINISTIC");
  return v != nullptr && *v != '\0' && std::string(v) != "0";
}

/// Returns true when the step still has to run. A completed identical step
/// is reported as a no-op; a completed step with a different configuration
/// refuses to be overwritten without --force.
bool step_should_run(const GlobalOpts& g, const std::string& step_key,
                     const std::string& hash) {
  const fs::path dir = g.run_root / ".steps" / step_key;
  switch (artifacts::step_state(dir, step_key, hash)) {
    case artifacts::StepState::kMissing:
      return true;
    case artifacts::StepState::kComplete:
      if (g.force) return true;
      notice(step_key + ": already complete, skipping (use --force to redo)");
      return false;
    case artifacts::StepState::kMismatch:
      if (g.force) return true;
      throw ArtifactError(step_key +
                          " was completed with a different configuration; "
                          "use --force to overwrite");
  }
  return true;
}

void step_done(const GlobalOpts& g, const std::string& step_key,
               const std::string& hash) {
  artifacts::mark_complete(g.run_root / ".steps" / step_key, step_key, hash);
}

std::string sanitize(std::string s) {
  std::replace(s.begin(), s.end(), ':', '_');
  std::replace(s.begin(), s.end(), '/', '_');
  return s;
}

data::ResourceSelector selector_from_mode(const std::string& mode) {
  if (mode == "bivariate") return data::ResourceSelector::all();
  const std::string prefix = "univariate:";
  if (mode.rfind(prefix, 0) == 0) {
    return data::ResourceSelector::univariate(mode.substr(prefix.size()));
  }
  throw ParameterError("mode must be 'bivariate' or 'univariate:<resource>'");
}

fs::path trace_path(const GlobalOpts& g, const std::string& cluster) {
  return artifacts::traces_dir(g.run_root) / (cluster + ".csv");
}

fs::path bundle_path(const GlobalOpts& g, const std::string& cluster,
                     const std::string& mode) {
  return artifacts::bundles_dir(g.run_root) / cluster / sanitize(mode);
}

data::SplitBundle load_bundle_or_explain(const fs::path& dir) {
  if (!fs::exists(dir / "meta.json")) {
    throw ArtifactError("no bundle at " + dir.string() +
                        "; run `cloudcast split` first");
  }
  return data::load_bundle(dir);
}

models::ModelConfig make_model_config(const fs::path& config_file,
                                      const std::string& model,
                                      const std::string& mode) {
  models::ModelConfig config;
  if (!config_file.empty()) {
    config = models::ModelConfig::from_json_file(config_file);
  } else if (mode == "bivariate") {
    config.dense_stack = {64, 64, 64};  // deeper stack for bivariate runs
  }
  config.kind = models::model_kind_from_name(model);
  config.output_resources = mode == "bivariate" ? 2 : 1;
  config.validate();
  return config;
}

models::TrainOptions make_train_options(const fs::path& config_file,
                                        int max_epochs, int patience) {
  models::TrainOptions opts;
  if (!config_file.empty()) {
    opts = models::TrainOptions::from_json_file(config_file);
  }
  if (max_epochs >= 0) opts.max_epochs = max_epochs;
  if (patience >= 0) opts.patience = patience;
  return opts;
}

void write_run_json(const fs::path& run_dir, const std::string& scenario,
                    const std::string& cluster, const std::string& model,
                    const std::string& mode, std::uint64_t seed,
                    const fs::path& bundle_dir, const std::string& hash) {
  json j;
  j["scenario"] = scenario;
  j["cluster"] = cluster;
  j["model"] = model;
  j["mode"] = mode;
  j["seed"] = seed;
  j["bundle_dir"] = bundle_dir.string();
  j["config_hash"] = hash;
  std::ofstream out(run_dir / "run.json");
  if (!out) throw ArtifactError("cannot write run.json");
  out << j.dump(2) << '\n';
}

std::vector<std::string> discover_clusters(const GlobalOpts& g,
                                           const std::string& mode) {
  std::vector<std::string> out;
  const fs::path root = artifacts::bundles_dir(g.run_root);
  if (!fs::exists(root)) return out;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (!entry.is_directory()) continue;
    if (fs::exists(entry.path() / sanitize(mode) / "meta.json")) {
      out.push_back(entry.path().filename().string());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> column(const Eigen::MatrixXd& m, Eigen::Index c) {
  std::vector<double> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out[static_cast<std::size_t>(i)] = m(i, c);
  }
  return out;
}

}  // namespace

// ----------------------------------------------------------- preprocess

int cmd_preprocess(const GlobalOpts& g, const PreprocessOpts& o) {
  if (!fs::exists(o.events)) {
    throw ArtifactError("event file not found: " + o.events.string());
  }
  json params{{"events", fs::absolute(o.events).string()},
              {"cluster", o.cluster_id},
              {"schema", o.schema},
              {"window", o.window_seconds},
              {"t0", o.t0},
              {"t1", o.t1}};
  const auto hash = artifacts::config_hash(params.dump());
  const std::string step = "preprocess_" + sanitize(o.cluster_id);
  if (!step_should_run(g, step, hash)) return 0;

  trace::EventSchema schema;
  if (o.schema == "canonical") {
    schema = trace::EventSchema::canonical();
  } else if (o.schema == "google") {
    schema = trace::EventSchema::google_cluster();
  } else if (o.schema == "alibaba_gpu") {
    schema = trace::EventSchema::alibaba_gpu();
  } else {
    throw ParameterError("unknown schema '" + o.schema + "'");
  }

  const auto file = trace::read_events_csv(o.events, schema);
  std::int64_t t0 = o.t0, t1 = o.t1;
  if (t0 < 0 || t1 < 0) {
    std::int64_t lo = std::numeric_limits<std::int64_t>::max();
    std::int64_t hi = std::numeric_limits<std::int64_t>::min();
    for (const auto& e : file.events) {
      lo = std::min(lo, e.start_time);
      hi = std::max(hi, e.end_time);
    }
    if (lo >= hi) throw DataError("no data: empty event file");
    const auto w = static_cast<std::int64_t>(o.window_seconds);
    if (t0 < 0) t0 = (lo / w) * w;
    if (t1 < 0) t1 = ((hi + w - 1) / w) * w;
  }

  auto result = trace::aggregate_events(file.events, o.window_seconds, t0, t1,
                                        o.cluster_id, file.resources);
  const auto report = trace::validate_trace(result.series);
  if (!report.ok()) {
    throw DataError("aggregated trace failed validation for cluster '" +
                    o.cluster_id + "'");
  }

  fs::create_directories(artifacts::traces_dir(g.run_root));
  fs::create_directories(artifacts::gaps_dir(g.run_root));
  trace::write_trace_csv(trace_path(g, o.cluster_id), result.series);
  trace::write_gap_report_json(
      artifacts::gaps_dir(g.run_root) / (o.cluster_id + "_gaps.json"),
      result.gaps);
  step_done(g, step, hash);
  notice("preprocess " + o.cluster_id + ": " +
         std::to_string(result.series.size()) + " windows, " +
         std::to_string(result.gaps.interpolated_indices.size()) +
         " interpolated, " + std::to_string(result.gaps.rejected_records) +
         " rejected records");
  return 0;
}

// ----------------------------------------------------------------- synth

int cmd_synth(const GlobalOpts& g, const SynthOpts& o) {
  const auto spec = synth::SynthSpec::from_json_file(o.spec);
  const auto hash = artifacts::config_hash(
      json{{"spec", json::parse(spec.to_json())}, {"cluster", o.cluster_id}}
          .dump());
  const std::string step = "synth_" + sanitize(o.cluster_id);
  if (!step_should_run(g, step, hash)) return 0;

  const auto series = synth::generate_trace(spec, o.cluster_id);
  fs::create_directories(artifacts::traces_dir(g.run_root));
  trace::write_trace_csv(trace_path(g, o.cluster_id), series);
  std::ofstream spec_copy(artifacts::traces_dir(g.run_root) /
                          (o.cluster_id + ".synth.json"));
  spec_copy << spec.to_json() << '\n';
  step_done(g, step, hash);
  notice("synth " + o.cluster_id + ": " + std::to_string(series.size()) +
         " points, " + std::to_string(series.resource_count()) +
         " resource(s)");
  return 0;
}

// ----------------------------------------------------------------- split

int cmd_split(const GlobalOpts& g, const SplitOpts& o) {
  const fs::path trace_file = trace_path(g, o.cluster_id);
  if (!fs::exists(trace_file)) {
    throw ArtifactError("trace not found: " + trace_file.string() +
                        "; run `cloudcast preprocess` or `cloudcast synth` "
                        "first");
  }
  json params{{"cluster", o.cluster_id},  {"mode", o.mode},
              {"input_len", o.input_len}, {"horizon", o.horizon_steps},
              {"train", o.train_fraction}, {"val", o.val_fraction}};
  const auto hash = artifacts::config_hash(params.dump());
  const std::string step =
      "split_" + sanitize(o.cluster_id) + "_" + sanitize(o.mode);
  if (!step_should_run(g, step, hash)) return 0;

  const auto series = trace::read_trace_csv(trace_file, o.cluster_id);
  const auto bundle =
      data::split(series, selector_from_mode(o.mode), o.input_len,
                  o.horizon_steps, o.train_fraction, o.val_fraction);
  data::save_bundle(bundle, bundle_path(g, o.cluster_id, o.mode));
  step_done(g, step, hash);
  notice("split " + o.cluster_id + " (" + o.mode + "): train " +
         std::to_string(bundle.train.size()) + ", val " +
         std::to_string(bundle.val.size()) + ", test " +
         std::to_string(bundle.test.size()));
  return 0;
}

// ----------------------------------------------------------------- train

int cmd_train(const GlobalOpts& g, const TrainOpts& o) {
  const auto config = make_model_config(o.model_config, o.model, o.mode);
  const auto base_opts =
      make_train_options(o.model_config, o.max_epochs, o.patience);
  json params{{"cluster", o.cluster_id},
              {"model", o.model},
              {"mode", o.mode},
              {"config", json::parse(config.to_json())},
              {"max_epochs", base_opts.max_epochs},
              {"patience", base_opts.patience},
              {"seeds", o.seeds}};
  const auto hash = artifacts::config_hash(params.dump());
  const std::string step = "train_" + sanitize(o.cluster_id) + "_" + o.model +
                           "_" + sanitize(o.mode);
  if (!step_should_run(g, step, hash)) return 0;

  const auto bdir = bundle_path(g, o.cluster_id, o.mode);
  const auto bundle = load_bundle_or_explain(bdir);

  for (const auto seed : o.seeds) {
    models::TrainOptions opts = base_opts;
    opts.seed = seed;
    const auto model = models::train(config, bundle, opts);

    const fs::path run_dir = artifacts::runs_dir(g.run_root) / "train" /
                             o.cluster_id / o.model / std::to_string(seed);
    fs::create_directories(run_dir);
    models::save_checkpoint(model, run_dir / "checkpoint", hash);
    bundle.scaler.save(run_dir / "scaler.json");
    const auto dist =
        models::predict_distribution(model, bundle, bundle.test);
    models::write_predictions_csv(run_dir / "predictions.csv", dist);
    write_run_json(run_dir, "train", o.cluster_id, o.model, o.mode, seed, bdir,
                   hash);
    notice("train " + o.cluster_id + " " + o.model + " seed " +
           std::to_string(seed) + ": stopped at epoch " +
           std::to_string(model.stop_epoch) + ", val loss " +
           std::to_string(model.history.back().val_loss));
  }
  step_done(g, step, hash);
  return 0;
}

// -------------------------------------------------------------- scenario

namespace {

int fan_out_scenario(const GlobalOpts& g, const ScenarioOpts& o,
                     const std::vector<std::uint64_t>& seeds) {
  std::vector<std::string> cmds;
  for (const auto seed : seeds) {
    // global flags go before the subcommand
    std::string cmd = "\"" + g.argv0 + "\"";
    cmd += " --run-root \"" + g.run_root.string() + "\"";
    cmd += " --jobs 1";
    if (g.force) cmd += " --force";
    cmd += " scenario";
    cmd += " --scenario " + o.scenario;
    cmd += " --target-cluster \"" + o.target_cluster + "\"";
    cmd += " --model " + o.model;
    cmd += " --mode \"" + o.mode + "\"";
    cmd += " --seed-list " + std::to_string(seed);
    if (!o.scenario_spec.empty()) {
      cmd += " --scenario-spec \"" + o.scenario_spec.string() + "\"";
    }
    if (!o.model_config.empty()) {
      cmd += " --model-config \"" + o.model_config.string() + "\"";
    }
    if (o.max_epochs >= 0) cmd += " --max-epochs " + std::to_string(o.max_epochs);
    if (o.patience >= 0) cmd += " --patience " + std::to_string(o.patience);
    if (o.ft_epochs >= 0) cmd += " --ft-epochs " + std::to_string(o.ft_epochs);
    if (o.ft_patience >= 0) {
      cmd += " --ft-patience " + std::to_string(o.ft_patience);
    }
    if (o.ft_lr > 0.0) cmd += " --ft-lr " + std::to_string(o.ft_lr);
    cmds.push_back(std::move(cmd));
  }

  std::atomic<std::size_t> next{0};
  std::atomic<int> failures{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cmds.size()) return;
      if (std::system(cmds[i].c_str()) != 0) failures.fetch_add(1);
    }
  };
  std::vector<std::thread> pool;
  const int n_workers =
      std::min<int>(g.jobs, static_cast<int>(cmds.size()));
  for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failures.load() != 0) {
    throw std::runtime_error("scenario worker subprocess failed");
  }
  return 0;
}

}  // namespace

int cmd_scenario(const GlobalOpts& g, const ScenarioOpts& o) {
  scenarios::ScenarioSpec spec;
  if (!o.scenario_spec.empty()) {
    spec = scenarios::ScenarioSpec::from_json_file(o.scenario_spec);
  } else {
    spec.scenario = scenarios::scenario_from_name(
        o.scenario.empty() ? "all" : o.scenario);
    spec.model_kind =
        models::model_kind_from_name(o.model.empty() ? "hbnn" : o.model);
    spec.mode = selector_from_mode(o.mode.empty() ? "bivariate" : o.mode);
    spec.cluster_universe = discover_clusters(g, spec.mode.label());
    for (const auto& id : spec.cluster_universe) {
      if (id.rfind("gc19", 0) == 0) spec.gc19_group.push_back(id);
    }
  }
  // explicit flags override the spec file
  if (!o.scenario.empty()) {
    spec.scenario = scenarios::scenario_from_name(o.scenario);
  }
  if (!o.target_cluster.empty()) spec.target_cluster = o.target_cluster;
  if (!o.model.empty()) {
    spec.model_kind = models::model_kind_from_name(o.model);
  }
  if (!o.mode.empty()) spec.mode = selector_from_mode(o.mode);
  if (!o.seeds.empty()) spec.seeds = o.seeds;
  if (scenarios::is_fine_tuned(spec.scenario)) {
    scenarios::FineTuneOptions ft =
        spec.fine_tune.value_or(scenarios::FineTuneOptions{});
    if (o.ft_epochs >= 0) ft.max_epochs = o.ft_epochs;
    if (o.ft_patience >= 0) ft.patience = o.ft_patience;
    if (o.ft_lr > 0.0) ft.learning_rate = o.ft_lr;
    spec.fine_tune = ft;
  }
  spec.validate();

  const std::string scenario_label = scenarios::scenario_name(spec.scenario);
  const std::string model_label = models::model_short_name(spec.model_kind);
  const std::string mode_label = spec.mode.label();

  const auto config =
      make_model_config(o.model_config, model_label, mode_label);
  const auto base_opts =
      make_train_options(o.model_config, o.max_epochs, o.patience);
  json params{{"spec", json::parse(spec.to_json())},
              {"config", json::parse(config.to_json())},
              {"max_epochs", base_opts.max_epochs},
              {"patience", base_opts.patience}};
  const auto hash = artifacts::config_hash(params.dump());
  const std::string step = "scenario_" + scenario_label + "_" +
                           sanitize(spec.target_cluster) + "_" + model_label +
                           "_" + sanitize(mode_label) + "_seeds" +
                           std::to_string(spec.seeds.front()) + "-" +
                           std::to_string(spec.seeds.back());
  if (!step_should_run(g, step, hash)) return 0;

  const int jobs = deterministic_mode() ? 1 : g.jobs;
  if (jobs > 1 && spec.seeds.size() > 1) {
    ScenarioOpts worker = o;
    worker.scenario = scenario_label;
    worker.target_cluster = spec.target_cluster;
    worker.model = model_label;
    worker.mode = mode_label;
    fan_out_scenario(g, worker, spec.seeds);
    step_done(g, step, hash);
    return 0;
  }

  scenarios::BundleMap bundles;
  std::map<std::string, fs::path> bundle_dirs;
  auto needed = spec.training_clusters();
  needed.push_back(spec.target_cluster);
  for (const auto& id : needed) {
    if (bundles.count(id)) continue;
    const auto dir = bundle_path(g, id, mode_label);
    bundles.emplace(id, load_bundle_or_explain(dir));
    bundle_dirs[id] = dir;
  }

  const auto runs = scenarios::run_scenario(spec, bundles, config, base_opts,
                                            artifacts::runs_dir(g.run_root));
  for (const auto& run : runs) {
    write_run_json(run.run_dir, scenario_label, spec.target_cluster,
                   model_label, mode_label, run.seed,
                   bundle_dirs[spec.target_cluster], hash);
    notice("scenario " + scenario_label + " target " + spec.target_cluster +
           " seed " + std::to_string(run.seed) + " -> " +
           run.run_dir.string());
  }
  step_done(g, step, hash);
  return 0;
}

// -------------------------------------------------------------- evaluate

int cmd_evaluate(const GlobalOpts& g, const EvaluateOpts& o) {
  const fs::path run_json = o.run_dir / "run.json";
  if (!fs::exists(run_json)) {
    throw ArtifactError("no run at " + o.run_dir.string() +
                        "; run `cloudcast train` or `cloudcast scenario` "
                        "first");
  }
  json run;
  {
    std::ifstream in(run_json);
    in >> run;
  }
  const std::string scenario = run.at("scenario");
  const std::string cluster = run.at("cluster");
  const std::string model_name = run.at("model");
  const std::string mode = run.at("mode");
  const auto seed = run.at("seed").get<std::uint64_t>();

  json params{{"run_dir", fs::absolute(o.run_dir).string()},
              {"confidences", o.confidences},
              {"pinball", o.pinball},
              {"raw", o.raw},
              {"compare", o.compare_run_dir.string()}};
  const auto hash = artifacts::config_hash(params.dump());
  const std::string step = "evaluate_" + sanitize(scenario) + "_" +
                           sanitize(cluster) + "_" + model_name + "_" +
                           std::to_string(seed);
  if (!step_should_run(g, step, hash)) return 0;

  const auto bundle =
      load_bundle_or_explain(fs::path(run.at("bundle_dir").get<std::string>()));
  const auto dist = models::read_predictions_csv(o.run_dir / "predictions.csv");
  if (dist.rows() != static_cast<Eigen::Index>(bundle.test.size())) {
    throw ArtifactError("predictions do not cover the bundle test set");
  }
  for (std::size_t i = 0; i < bundle.test.size(); ++i) {
    if (dist.target_index[i] != bundle.test[i].target) {
      throw ArtifactError("prediction rows do not align with the test set");
    }
  }
  const Eigen::MatrixXd actuals = bundle.targets(bundle.test);
  const auto r = bundle.resource_count();

  const auto model_config =
      models::ModelConfig::from_json_file(o.run_dir / "checkpoint" /
                                          "config.json");
  const auto side = model_config.interval_side;

  json metrics;
  metrics["scenario"] = scenario;
  metrics["cluster"] = cluster;
  metrics["model"] = model_name;
  metrics["mode"] = mode;
  metrics["seed"] = seed;
  // Aggregation mixes scenarios/models by design; what has to agree across
  // aggregated rows is the evaluation protocol. The run's own training
  // config hash stays in run.json and the checkpoint meta.
  metrics["config_hash"] =
      artifacts::config_hash(json{{"confidences", o.confidences}}.dump());
  metrics["run_config_hash"] = run.at("config_hash");

  // Point-model QoS needs thresholds calibrated on validation predictions.
  std::map<double, double> thresholds;
  nn::Mat val_mean;
  if (!dist.has_std()) {
    const fs::path ckpt = fs::exists(o.run_dir / "finetuned")
                              ? o.run_dir / "finetuned"
                              : o.run_dir / "checkpoint";
    const auto model = models::load_checkpoint(ckpt);
    const auto val_dist =
        models::predict_distribution(model, bundle, bundle.val);
    val_mean = val_dist.mean;
    const Eigen::MatrixXd val_actuals = bundle.targets(bundle.val);
    for (const double conf : o.confidences) {
      // One shared threshold per level, pooled across resources.
      std::vector<double> vp, va;
      for (Eigen::Index c = 0; c < r; ++c) {
        const auto pc = column(val_mean, c);
        const auto ac = column(val_actuals, c);
        vp.insert(vp.end(), pc.begin(), pc.end());
        va.insert(va.end(), ac.begin(), ac.end());
      }
      thresholds[conf] = scenarios::calibrate_point_threshold(vp, va, conf);
      metrics["threshold"][std::to_string(static_cast<int>(conf))] =
          thresholds[conf];
    }
  }

  for (Eigen::Index c = 0; c < r; ++c) {
    const std::string& res = bundle.resources[static_cast<std::size_t>(c)];
    const auto actual = column(actuals, c);
    const auto mean = column(dist.mean, c);
    const double raw_lo = bundle.scaler.min()(c);
    const double raw_span = bundle.scaler.max()(c) - raw_lo;
    auto unscale = [&](const std::vector<double>& v) {
      std::vector<double> out(v.size());
      for (std::size_t i = 0; i < v.size(); ++i) {
        out[i] = raw_lo + v[i] * raw_span;
      }
      return out;
    };

    const auto pm = eval::point_metrics(mean, actual);
    metrics["point"][res] = {{"mse", pm.mse}, {"mae", pm.mae}};
    if (o.raw) {
      const auto pm_raw = eval::point_metrics(unscale(mean), unscale(actual));
      metrics["point_raw"][res] = {{"mse", pm_raw.mse}, {"mae", pm_raw.mae}};
    }

    for (const double conf : o.confidences) {
      std::vector<double> bounds(mean.size());
      if (dist.has_std()) {
        const double z = models::interval_z(conf / 100.0, side);
        for (std::size_t i = 0; i < bounds.size(); ++i) {
          bounds[i] = mean[i] + z * dist.std(static_cast<Eigen::Index>(i), c);
        }
      } else {
        const double theta = thresholds.at(conf);
        for (std::size_t i = 0; i < bounds.size(); ++i) {
          bounds[i] = mean[i] * (1.0 + theta);
        }
      }
      const auto qos = eval::qos_metrics(bounds, actual, conf);
      json& cell = metrics["qos"][std::to_string(static_cast<int>(conf))][res];
      cell = {{"sr", qos.sr}, {"op", qos.op},   {"up", qos.up},
              {"tpr", qos.tpr}, {"n", qos.n}};
      if (o.raw) {
        const auto qr =
            eval::qos_metrics(unscale(bounds), unscale(actual), conf);
        metrics["qos_raw"][std::to_string(static_cast<int>(conf))][res] = {
            {"sr", qr.sr}, {"op", qr.op},   {"up", qr.up},
            {"tpr", qr.tpr}, {"n", qr.n}};
      }
      if (o.pinball) {
        // Beyond the core tables: asymmetric interval score.
        metrics["pinball"][std::to_string(static_cast<int>(conf))][res] =
            eval::pinball_loss(bounds, actual, conf / 100.0);
      }
    }

    if (dist.has_std()) {
      const auto stddev = column(dist.std, c);
      // Quantile convention regardless of the QoS interval side: the curve
      // compares nominal one-sided coverage against achieved SR.
      const auto curve =
          eval::calibration_curve(mean, stddev, actual, eval::default_levels(),
                                  models::IntervalSide::kOneSided);
      metrics["calibration"][res] = {{"levels", curve.levels},
                                     {"achieved_sr", curve.achieved_sr},
                                     {"curve_mse", curve.curve_mse},
                                     {"curve_mae", curve.curve_mae}};
      const auto ts = eval::tpr_sr_curve(mean, stddev, actual,
                                         eval::default_levels(), side);
      std::vector<double> levels, tprs, srs;
      for (const auto& p : ts) {
        levels.push_back(p.level);
        tprs.push_back(p.tpr);
        srs.push_back(p.sr);
      }
      metrics["tpr_sr"][res] = {{"levels", levels}, {"tpr", tprs}, {"sr", srs}};
    }

    if (r == 2) {
      // Residual-variance check against the companion resource.
      const auto other = column(actuals, 1 - c);
      std::vector<double> resid(mean.size());
      for (std::size_t i = 0; i < resid.size(); ++i) {
        resid[i] = actual[i] - mean[i];
      }
      Eigen::MatrixXd z(static_cast<Eigen::Index>(other.size()), 1);
      for (std::size_t i = 0; i < other.size(); ++i) {
        z(static_cast<Eigen::Index>(i), 0) = other[i];
      }
      try {
        const auto bp = eval::breusch_pagan(resid, z);
        metrics["breusch_pagan"][res] = {{"lm", bp.lm},
                                         {"p_value", bp.p_value}};
      } catch (const DataError&) {
        // degenerate regressor; leave the entry out
      }
    }
  }

  if (r == 2) {
    metrics["pearson"]["resources"] =
        eval::pearson(column(actuals, 0), column(actuals, 1));
  }

  if (!o.compare_run_dir.empty()) {
    const auto other =
        models::read_predictions_csv(o.compare_run_dir / "predictions.csv");
    if (other.rows() != dist.rows() || other.target_index != dist.target_index) {
      throw ArtifactError("compare run predicts a different test set");
    }
    for (Eigen::Index c = 0; c < r; ++c) {
      const std::string& res = bundle.resources[static_cast<std::size_t>(c)];
      const auto actual = column(actuals, c);
      std::vector<double> ea(actual.size()), eb(actual.size());
      for (std::size_t i = 0; i < actual.size(); ++i) {
        ea[i] = actual[i] - dist.mean(static_cast<Eigen::Index>(i), c);
        eb[i] = actual[i] - other.mean(static_cast<Eigen::Index>(i), c);
      }
      try {
        const auto dm = eval::diebold_mariano(ea, eb, eval::DmLoss::kSquared,
                                              bundle.horizon_steps);
        metrics["diebold_mariano"][res] = {
            {"statistic", dm.statistic},
            {"p_value", dm.p_value},
            {"versus", o.compare_run_dir.string()}};
      } catch (const DegenerateTestError& e) {
        metrics["diebold_mariano"][res] = {{"error", e.what()}};
      }
    }
  }

  const fs::path out_dir = artifacts::metrics_dir(g.run_root) / scenario /
                           cluster / model_name;
  fs::create_directories(out_dir);
  const fs::path out_file = out_dir / (std::to_string(seed) + ".json");
  std::ofstream out(out_file);
  if (!out) throw ArtifactError("cannot write metrics: " + out_file.string());
  out << metrics.dump(2) << '\n';
  step_done(g, step, hash);
  notice("evaluate " + o.run_dir.string() + " -> " + out_file.string());
  return 0;
}

// ----------------------------------------------------------------- bench

int cmd_bench(const GlobalOpts& g, const BenchOpts& o) {
  const auto config = make_model_config(o.model_config, o.model, o.mode);
  json params{{"cluster", o.cluster_id},
              {"model", o.model},
              {"mode", o.mode},
              {"config", json::parse(config.to_json())},
              {"repetitions", o.repetitions},
              {"fractions", o.fractions},
              {"steps", o.steps},
              {"max_epochs", o.max_epochs},
              {"seed", o.seed}};
  const auto hash = artifacts::config_hash(params.dump());
  const std::string step =
      "bench_" + sanitize(o.cluster_id) + "_" + o.model + "_" + sanitize(o.mode);
  if (!step_should_run(g, step, hash)) return 0;

  const auto bundle = load_bundle_or_explain(bundle_path(g, o.cluster_id, o.mode));

  const fs::path out_dir = artifacts::bench_dir(g.run_root);
  fs::create_directories(out_dir);
  bench::ExclusiveLock lock(out_dir / ".lock");

  models::TrainOptions opts;
  opts.max_epochs = o.max_epochs;
  opts.patience = o.max_epochs;  // no early exit inside timed runs
  opts.seed = o.seed;

  bench::RuntimeReport report;
  report.model_label = o.model + "_" + sanitize(o.mode) + "_" + o.cluster_id;
  report.training =
      bench::bench_training(config, bundle, o.fractions, opts, o.repetitions);

  const auto model = models::train(config, bundle, opts);
  scenarios::FineTuneOptions ft;
  ft.max_epochs = 5;
  ft.patience = 5;
  report.finetune =
      bench::bench_finetune(model, bundle, o.steps, ft, o.repetitions);
  report.inference = bench::bench_inference(model, bundle);

  const std::string tag = o.model + "_" + sanitize(o.cluster_id);
  bench::write_report_csv(out_dir / ("runtime_" + tag + ".csv"), report);
  bench::write_raw_log(out_dir / ("raw_" + tag + ".jsonl"), report);
  step_done(g, step, hash);
  notice("bench " + tag + ": " + std::to_string(report.training.size()) +
         " training cells, " + std::to_string(report.finetune.size()) +
         " finetune cells, inference median " +
         std::to_string(report.inference.mean_s) + " s");
  return 0;
}

// ---------------------------------------------------------------- report

int cmd_report(const GlobalOpts& g, const ReportOpts&) {
  std::vector<fs::path> metric_files;
  const fs::path root = artifacts::metrics_dir(g.run_root);
  if (fs::exists(root)) {
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
      if (entry.is_regular_file() && entry.path().extension() == ".json") {
        metric_files.push_back(entry.path());
      }
    }
  }
  if (metric_files.empty()) {
    throw ArtifactError("no metrics under " + root.string() +
                        "; run `cloudcast evaluate` first");
  }
  std::sort(metric_files.begin(), metric_files.end());

  eval::ReportOptions options;
  options.allow_mixed_hashes = g.force;
  const auto outcome = eval::aggregate_report(
      metric_files, artifacts::reports_dir(g.run_root), options);
  for (const auto& w : outcome.warnings) notice("warning: " + w);

  // concatenate any persisted runtime protocol results into one table
  const fs::path bench_root = artifacts::bench_dir(g.run_root);
  std::size_t extra = 0;
  if (fs::exists(bench_root)) {
    std::vector<fs::path> bench_csvs;
    for (const auto& entry : fs::directory_iterator(bench_root)) {
      const auto name = entry.path().filename().string();
      if (name.rfind("runtime_", 0) == 0 && entry.path().extension() == ".csv") {
        bench_csvs.push_back(entry.path());
      }
    }
    if (!bench_csvs.empty()) {
      std::sort(bench_csvs.begin(), bench_csvs.end());
      std::ofstream out(artifacts::reports_dir(g.run_root) /
                        "summary_runtime.csv");
      out << "model,kind,label,seconds,std_s,repetitions\n";
      for (const auto& path : bench_csvs) {
        std::ifstream in(path);
        std::string line;
        std::getline(in, line);  // header
        while (std::getline(in, line)) {
          if (!line.empty()) out << line << '\n';
        }
      }
      extra = 1;
    }
  }
  notice("report: wrote " + std::to_string(outcome.written.size() + extra) +
         " files to " + artifacts::reports_dir(g.run_root).string());
  return 0;
}

}  // namespace cloudcast::cli
