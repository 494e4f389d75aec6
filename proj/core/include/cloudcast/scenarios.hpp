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

#ifndef CLOUDCAST_SCENARIOS_HPP_
#define CLOUDCAST_SCENARIOS_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cloudcast/model.hpp"
#include "cloudcast/windowing.hpp"

namespace cloudcast::scenarios {

/// Pretraining/fine-tuning combinations. The *_FT variants continue
/// optimization on the target cluster after pretraining.
/// The gc19_but_one variants exist for completeness but are left out of
/// default report groupings.
enum class Scenario {
  kAll,          // pretrain on every cluster in the universe
  kAllFt,
  kAllButOne,    // pretrain on the universe minus the target (zero-shot)
  kAllButOneFt,  // ... then fine-tune on the target (one-shot)
  kGc19,         // pretrain on the GC19 group only
  kGc19Ft,
  kGc19ButOne,   // GC19 group minus the target
  kGc19ButOneFt,
  kRandom,       // train from random init on the target cluster alone
};

Scenario scenario_from_name(const std::string& name);
std::string scenario_name(Scenario s);
bool is_fine_tuned(Scenario s);

struct FineTuneOptions {
  int max_epochs = 50;
  int patience = 10;
  // Defaults to 0.1x the pretraining learning rate when unset.
  std::optional<double> learning_rate;
};

struct ScenarioSpec {
  Scenario scenario = Scenario::kAll;
  std::string target_cluster;
  std::vector<std::string> cluster_universe;
  std::vector<std::string> gc19_group;
  models::ModelKind model_kind = models::ModelKind::kBayesianLastLayer;
  data::ResourceSelector mode = data::ResourceSelector::all();
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::optional<FineTuneOptions> fine_tune;

  void validate() const;  // throws ParameterError
  /// Clusters whose training splits feed the pretraining stream.
  std::vector<std::string> training_clusters() const;

  std::string to_json() const;
  static ScenarioSpec from_json(const std::string& text);
  static ScenarioSpec from_json_file(const std::filesystem::path& path);
};

using BundleMap = std::map<std::string, data::SplitBundle>;

/// Assembles the deterministic merged/shuffled pretraining stream for one
/// seed. Exposed so scenario separation can be asserted directly.
data::TrainStream training_stream(const ScenarioSpec& spec,
                                  const BundleMap& bundles,
                                  std::uint64_t seed);

struct ScenarioRun {
  std::uint64_t seed = 0;
  std::filesystem::path run_dir;          // runs/<scenario>/<target>/<model>/<seed>
  std::filesystem::path checkpoint_dir;   // pretrained (or only) model
  std::filesystem::path finetuned_dir;    // present for *_FT scenarios
  std::filesystem::path predictions_csv;  // target-cluster test forecasts
};

/// Trains one model per seed, fine-tunes when the scenario asks for it,
/// and writes target-cluster test predictions under
/// `runs_root/<scenario>/<target>/<model>/<seed>/`.
std::vector<ScenarioRun> run_scenario(const ScenarioSpec& spec,
                                      const BundleMap& bundles,
                                      const models::ModelConfig& config,
                                      const models::TrainOptions& base_opts,
                                      const std::filesystem::path& runs_root);

/// Continues optimization on the target bundle's training split. The input
/// model is untouched; the returned copy carries the appended history.
models::TrainedModel fine_tune(const models::TrainedModel& model,
                               const data::SplitBundle& bundle,
                               const FineTuneOptions& opts);

/// Smallest threshold theta on the grid {0, 0.001, ..., 1} such that
/// bounds mean*(1+theta) reach at least `target_sr` percent coverage of
/// `actual`; returns the grid maximum when unreachable. Calibrate on
/// validation predictions, never on test data.
double calibrate_point_threshold(std::span<const double> predictions,
                                 std::span<const double> actual,
                                 double target_sr);

/// Random-search grids. Every trial draws one value per axis.
struct HyperParamSpace {
  std::vector<int> dense_layers = {1, 2, 3};
  std::vector<int> dense_units = {32, 64, 128};
  std::vector<int> lstm_units = {32, 64};
  std::vector<int> batch_size = {128, 256};
  std::vector<std::string> activations = {"relu", "tanh"};
  std::vector<double> learning_rate = {1e-2, 1e-3, 1e-4};
  std::vector<double> adam_beta1 = {0.9};
  std::vector<double> adam_beta2 = {0.999};
  std::vector<double> weight_decay = {0.0};
  std::vector<int> conv_blocks = {1, 2};
  std::vector<int> conv_filters = {16, 32, 64};
  std::vector<int> conv_width = {3, 5};
  int budget = 10;
  int trial_max_epochs = 30;  // reduced-budget trials
  int trial_patience = 5;

  void validate() const;
  static HyperParamSpace from_json_file(const std::filesystem::path& path);
};

struct TrialRecord {
  int trial = 0;
  std::string params_json;
  double val_loss = 0.0;
  int epochs_ran = 0;
};

struct SearchResult {
  models::ModelConfig best;
  double best_val_loss = 0.0;
  std::vector<TrialRecord> trials;
};

/// Seeded random search; diverging trials score +inf. Returns the config
/// with the lowest validation loss.
SearchResult search_hyperparams(const HyperParamSpace& space,
                                const models::ModelConfig& base,
                                const data::TrainStream& stream,
                                std::uint64_t search_seed);

/// Trial log CSV: trial,params_json,val_loss,epochs_ran
void write_trial_log(const std::filesystem::path& path,
                     const std::vector<TrialRecord>& trials);

}  // namespace cloudcast::scenarios

#endif  // CLOUDCAST_SCENARIOS_HPP_
