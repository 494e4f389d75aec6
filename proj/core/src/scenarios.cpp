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

#include "cloudcast/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>

#include "cloudcast/csv.hpp"
#include "cloudcast/errors.hpp"
#include "cloudcast/metrics.hpp"
#include "cloudcast/rng.hpp"

namespace cloudcast::scenarios {

Scenario scenario_from_name(const std::string& name) {
  if (name == "all") return Scenario::kAll;
  if (name == "all_ft") return Scenario::kAllFt;
  if (name == "all_but_one") return Scenario::kAllButOne;
  if (name == "all_but_one_ft") return Scenario::kAllButOneFt;
  if (name == "gc19") return Scenario::kGc19;
  if (name == "gc19_ft") return Scenario::kGc19Ft;
  if (name == "gc19_but_one") return Scenario::kGc19ButOne;
  if (name == "gc19_but_one_ft") return Scenario::kGc19ButOneFt;
  if (name == "random") return Scenario::kRandom;
  throw ParameterError("unknown scenario '" + name + "'");
}

std::string scenario_name(Scenario s) {
  switch (s) {
    case Scenario::kAll: return "all";
    case Scenario::kAllFt: return "all_ft";
    case Scenario::kAllButOne: return "all_but_one";
    case Scenario::kAllButOneFt: return "all_but_one_ft";
    case Scenario::kGc19: return "gc19";
    case Scenario::kGc19Ft: return "gc19_ft";
    case Scenario::kGc19ButOne: return "gc19_but_one";
    case Scenario::kGc19ButOneFt: return "gc19_but_one_ft";
    case Scenario::kRandom: return "random";
  }
  return "all";
}

bool is_fine_tuned(Scenario s) {
  return s == Scenario::kAllFt || s == Scenario::kAllButOneFt ||
         s == Scenario::kGc19Ft || s == Scenario::kGc19ButOneFt;
}

void ScenarioSpec::validate() const {
  if (target_cluster.empty()) throw ParameterError("target_cluster is empty");
  if (cluster_universe.empty()) {
    throw ParameterError("cluster_universe is empty");
  }
  const bool target_in_universe =
      std::find(cluster_universe.begin(), cluster_universe.end(),
                target_cluster) != cluster_universe.end();
  if (!target_in_universe) {
    throw ParameterError("target_cluster must belong to cluster_universe");
  }
  if (seeds.empty()) throw ParameterError("need at least one seed");
  if (is_fine_tuned(scenario) && !fine_tune.has_value()) {
    throw ParameterError("fine-tuned scenarios require fine_tune options");
  }
  if (scenario == Scenario::kGc19 || scenario == Scenario::kGc19Ft ||
      scenario == Scenario::kGc19ButOne ||
      scenario == Scenario::kGc19ButOneFt) {
    if (gc19_group.empty()) {
      throw ParameterError("gc19 scenarios require a gc19_group");
    }
    const bool in_group = std::find(gc19_group.begin(), gc19_group.end(),
                                    target_cluster) != gc19_group.end();
    if (!in_group) {
      throw ParameterError("gc19 scenarios require the target in gc19_group");
    }
    for (const auto& id : gc19_group) {
      if (std::find(cluster_universe.begin(), cluster_universe.end(), id) ==
          cluster_universe.end()) {
        throw ParameterError("gc19_group member '" + id +
                             "' is not in cluster_universe");
      }
    }
  }
}

std::vector<std::string> ScenarioSpec::training_clusters() const {
  switch (scenario) {
    case Scenario::kAll:
    case Scenario::kAllFt:
      return cluster_universe;
    case Scenario::kAllButOne:
    case Scenario::kAllButOneFt: {
      std::vector<std::string> out;
      for (const auto& id : cluster_universe) {
        if (id != target_cluster) out.push_back(id);
      }
      return out;
    }
    case Scenario::kGc19:
    case Scenario::kGc19Ft:
      return gc19_group;
    case Scenario::kGc19ButOne:
    case Scenario::kGc19ButOneFt: {
      std::vector<std::string> out;
      for (const auto& id : gc19_group) {
        if (id != target_cluster) out.push_back(id);
      }
      return out;
    }
    case Scenario::kRandom:
      return {target_cluster};
  }
  return {};
}

std::string ScenarioSpec::to_json() const {
  nlohmann::json j;
  j["scenario"] = scenario_name(scenario);
  j["target_cluster"] = target_cluster;
  j["cluster_universe"] = cluster_universe;
  j["gc19_group"] = gc19_group;
  j["model"] = models::model_short_name(model_kind);
  j["mode"] = mode.label();
  j["seeds"] = seeds;
  if (fine_tune) {
    j["fine_tune"]["max_epochs"] = fine_tune->max_epochs;
    j["fine_tune"]["patience"] = fine_tune->patience;
    if (fine_tune->learning_rate) {
      j["fine_tune"]["learning_rate"] = *fine_tune->learning_rate;
    }
  }
  return j.dump(2);
}

namespace {

data::ResourceSelector mode_from_label(const std::string& label) {
  if (label == "bivariate") return data::ResourceSelector::all();
  const std::string prefix = "univariate:";
  if (label.rfind(prefix, 0) == 0) {
    return data::ResourceSelector::univariate(label.substr(prefix.size()));
  }
  throw ParameterError("mode must be 'bivariate' or 'univariate:<resource>'");
}

}  // namespace

ScenarioSpec ScenarioSpec::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  ScenarioSpec spec;
  spec.scenario = scenario_from_name(j.at("scenario").get<std::string>());
  spec.target_cluster = j.at("target_cluster").get<std::string>();
  spec.cluster_universe =
      j.at("cluster_universe").get<std::vector<std::string>>();
  if (j.contains("gc19_group")) {
    spec.gc19_group = j.at("gc19_group").get<std::vector<std::string>>();
  }
  if (j.contains("model")) {
    spec.model_kind = models::model_kind_from_name(j.at("model"));
  }
  if (j.contains("mode")) {
    spec.mode = mode_from_label(j.at("mode").get<std::string>());
  }
  if (j.contains("seeds")) {
    spec.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  }
  if (j.contains("fine_tune")) {
    FineTuneOptions ft;
    const auto& f = j.at("fine_tune");
    ft.max_epochs = f.value("max_epochs", ft.max_epochs);
    ft.patience = f.value("patience", ft.patience);
    if (f.contains("learning_rate")) {
      ft.learning_rate = f.at("learning_rate").get<double>();
    }
    spec.fine_tune = ft;
  }
  spec.validate();
  return spec;
}

ScenarioSpec ScenarioSpec::from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ArtifactError("cannot open scenario spec: " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return from_json(text);
}

data::TrainStream training_stream(const ScenarioSpec& spec,
                                  const BundleMap& bundles,
                                  std::uint64_t seed) {
  spec.validate();
  std::vector<const data::SplitBundle*> selected;
  for (const auto& id : spec.training_clusters()) {
    const auto it = bundles.find(id);
    if (it == bundles.end()) {
      throw ArtifactError("missing bundle for cluster '" + id + "'");
    }
    selected.push_back(&it->second);
  }
  return data::merge_shuffle(selected, seed);
}

models::TrainedModel fine_tune(const models::TrainedModel& model,
                               const data::SplitBundle& bundle,
                               const FineTuneOptions& opts) {
  if (bundle.resource_count() != model.config.output_resources) {
    throw ParameterError("fine_tune: bundle shape does not match model");
  }
  models::TrainedModel tuned = model.clone();
  if (opts.max_epochs <= 0) return tuned;

  models::TrainOptions train_opts;
  train_opts.max_epochs = opts.max_epochs;
  train_opts.patience = opts.patience;
  train_opts.seed = rng::derive_seed(model.seed, 41);
  train_opts.learning_rate_override =
      opts.learning_rate.value_or(0.1 * model.config.learning_rate);
  models::continue_training(tuned, data::to_stream(bundle, train_opts.seed),
                            train_opts);
  return tuned;
}

std::vector<ScenarioRun> run_scenario(const ScenarioSpec& spec,
                                      const BundleMap& bundles,
                                      const models::ModelConfig& config,
                                      const models::TrainOptions& base_opts,
                                      const std::filesystem::path& runs_root) {
  spec.validate();
  if (config.kind != spec.model_kind) {
    throw ParameterError("config kind does not match scenario spec");
  }
  const auto target_it = bundles.find(spec.target_cluster);
  if (target_it == bundles.end()) {
    throw ArtifactError("missing bundle for target cluster '" +
                        spec.target_cluster + "'");
  }
  const auto& target_bundle = target_it->second;

  std::vector<ScenarioRun> runs;
  for (const std::uint64_t seed : spec.seeds) {
    const auto stream = training_stream(spec, bundles, seed);

    models::TrainOptions opts = base_opts;
    opts.seed = seed;
    auto model = models::train(config, stream, opts);

    ScenarioRun run;
    run.seed = seed;
    run.run_dir = runs_root / scenario_name(spec.scenario) /
                  spec.target_cluster / models::model_short_name(config.kind) /
                  std::to_string(seed);
    run.checkpoint_dir = run.run_dir / "checkpoint";
    std::filesystem::create_directories(run.run_dir);
    models::save_checkpoint(model, run.checkpoint_dir);
    // target scaler travels with the run so forecasts can be unscaled
    // without the bundle
    target_bundle.scaler.save(run.run_dir / "scaler.json");

    const models::TrainedModel* predictor = &model;
    models::TrainedModel tuned;
    if (is_fine_tuned(spec.scenario)) {
      tuned = fine_tune(model, target_bundle, *spec.fine_tune);
      run.finetuned_dir = run.run_dir / "finetuned";
      models::save_checkpoint(tuned, run.finetuned_dir);
      predictor = &tuned;
    }

    const auto dist =
        models::predict_distribution(*predictor, target_bundle,
                                     target_bundle.test);
    run.predictions_csv = run.run_dir / "predictions.csv";
    models::write_predictions_csv(run.predictions_csv, dist);
    runs.push_back(std::move(run));
  }
  return runs;
}

double calibrate_point_threshold(std::span<const double> predictions,
                                 std::span<const double> actual,
                                 double target_sr) {
  if (predictions.size() != actual.size() || predictions.empty()) {
    throw ParameterError("calibrate_point_threshold: bad inputs");
  }
  if (target_sr < 0.0 || target_sr > 100.0) {
    throw ParameterError("target_sr must be in [0, 100]");
  }
  std::vector<double> bounds(predictions.size());
  for (int i = 0; i <= 1000; ++i) {
    const double theta = static_cast<double>(i) / 1000.0;
    for (std::size_t k = 0; k < predictions.size(); ++k) {
      bounds[k] = predictions[k] * (1.0 + theta);
    }
    if (eval::qos_metrics(bounds, actual, target_sr).sr >= target_sr) {
      return theta;
    }
  }
  return 1.0;  // unreachable target: report the grid maximum
}

void HyperParamSpace::validate() const {
  const auto non_empty = [](const auto& grid, const char* name) {
    if (grid.empty()) {
      throw ParameterError(std::string("empty search grid: ") + name);
    }
  };
  non_empty(dense_layers, "dense_layers");
  non_empty(dense_units, "dense_units");
  non_empty(lstm_units, "lstm_units");
  non_empty(batch_size, "batch_size");
  non_empty(activations, "activations");
  non_empty(learning_rate, "learning_rate");
  non_empty(adam_beta1, "adam_beta1");
  non_empty(adam_beta2, "adam_beta2");
  non_empty(weight_decay, "weight_decay");
  non_empty(conv_blocks, "conv_blocks");
  non_empty(conv_filters, "conv_filters");
  non_empty(conv_width, "conv_width");
  if (budget < 1) throw ParameterError("search budget must be >= 1");
  if (trial_max_epochs < 1) throw ParameterError("trial_max_epochs must be >= 1");
}

HyperParamSpace HyperParamSpace::from_json_file(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ArtifactError("cannot open search space: " + path.string());
  nlohmann::json j;
  in >> j;
  HyperParamSpace s;
  auto grab = [&j](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  grab("dense_layers", s.dense_layers);
  grab("dense_units", s.dense_units);
  grab("lstm_units", s.lstm_units);
  grab("batch_size", s.batch_size);
  grab("activations", s.activations);
  grab("learning_rate", s.learning_rate);
  grab("adam_beta1", s.adam_beta1);
  grab("adam_beta2", s.adam_beta2);
  grab("weight_decay", s.weight_decay);
  grab("conv_blocks", s.conv_blocks);
  grab("conv_filters", s.conv_filters);
  grab("conv_width", s.conv_width);
  grab("budget", s.budget);
  grab("trial_max_epochs", s.trial_max_epochs);
  grab("trial_patience", s.trial_patience);
  s.validate();
  return s;
}

namespace {

template <typename T>
const T& pick(rng::PortableRng& gen, const std::vector<T>& grid) {
  return grid[static_cast<std::size_t>(gen.bounded(grid.size()))];
}

}  // namespace

SearchResult search_hyperparams(const HyperParamSpace& space,
                                const models::ModelConfig& base,
                                const data::TrainStream& stream,
                                std::uint64_t search_seed) {
  space.validate();
  rng::PortableRng gen(rng::derive_seed(search_seed, 23));

  SearchResult result;
  result.best_val_loss = std::numeric_limits<double>::infinity();

  for (int trial = 0; trial < space.budget; ++trial) {
    models::ModelConfig config = base;
    const int n_dense = pick(gen, space.dense_layers);
    const int units = pick(gen, space.dense_units);
    config.dense_stack.assign(static_cast<std::size_t>(n_dense), units);
    config.lstm_units = pick(gen, space.lstm_units);
    config.batch_size = pick(gen, space.batch_size);
    config.activation = pick(gen, space.activations);
    config.learning_rate = pick(gen, space.learning_rate);
    config.adam_beta1 = pick(gen, space.adam_beta1);
    config.adam_beta2 = pick(gen, space.adam_beta2);
    config.weight_decay = pick(gen, space.weight_decay);
    config.conv_blocks = pick(gen, space.conv_blocks);
    config.conv_kernels.clear();
    for (int b = 0; b < config.conv_blocks; ++b) {
      config.conv_kernels.push_back(
          {pick(gen, space.conv_filters), pick(gen, space.conv_width)});
    }

    TrialRecord record;
    record.trial = trial;
    record.params_json = nlohmann::json::parse(config.to_json()).dump();

    models::TrainOptions opts;
    opts.max_epochs = space.trial_max_epochs;
    opts.patience = space.trial_patience;
    opts.seed = rng::derive_seed(search_seed, 1000 + static_cast<std::uint64_t>(trial));
    try {
      const auto model = models::train(config, stream, opts);
      double best = std::numeric_limits<double>::infinity();
      for (const auto& epoch : model.history) {
        best = std::min(best, epoch.val_loss);
      }
      record.val_loss = best;
      record.epochs_ran = model.stop_epoch;
    } catch (const TrainingDiverged&) {
      record.val_loss = std::numeric_limits<double>::infinity();
      record.epochs_ran = 0;
    }

    if (record.val_loss < result.best_val_loss) {
      result.best_val_loss = record.val_loss;
      result.best = config;
    }
    result.trials.push_back(std::move(record));
  }

  if (!std::isfinite(result.best_val_loss)) {
    throw TrainingDiverged("every search trial diverged");
  }
  return result;
}

void write_trial_log(const std::filesystem::path& path,
                     const std::vector<TrialRecord>& trials) {
  std::ofstream out(path);
  if (!out) throw ArtifactError("cannot write trial log: " + path.string());
  out << "trial,params_json,val_loss,epochs_ran\n";
  for (const auto& t : trials) {
    std::string quoted = "\"";
    for (const char c : t.params_json) {
      quoted += c;
      if (c == '"') quoted += '"';  // CSV escaping
    }
    quoted += '"';
    out << t.trial << ',' << quoted << ',' << csv::format_double(t.val_loss)
        << ',' << t.epochs_ran << '\n';
  }
}

}  // namespace cloudcast::scenarios
