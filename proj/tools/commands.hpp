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

#ifndef CLOUDCAST_TOOLS_COMMANDS_HPP_
#define CLOUDCAST_TOOLS_COMMANDS_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace cloudcast::cli {

struct GlobalOpts {
  std::filesystem::path run_root;
  bool force = false;
  int jobs = 1;
  std::string argv0;  // for scenario worker fan-out
};

struct PreprocessOpts {
  std::filesystem::path events;
  std::string cluster_id;
  std::string schema = "canonical";
  int window_seconds = 300;
  std::int64_t t0 = -1;  // -1: derive from the events
  std::int64_t t1 = -1;
};

struct SynthOpts {
  std::filesystem::path spec;
  std::string cluster_id;
};

struct SplitOpts {
  std::string cluster_id;
  std::string mode = "bivariate";  // or univariate:<resource>
  int input_len = 288;
  int horizon_steps = 2;
  double train_fraction = 0.8;
  double val_fraction = 0.2;
};

struct TrainOpts {
  std::string cluster_id;
  std::string model = "lstmd";
  std::string mode = "bivariate";
  std::filesystem::path model_config;  // optional
  std::vector<std::uint64_t> seeds = {1};
  int max_epochs = -1;  // -1: from config file / defaults
  int patience = -1;
};

struct ScenarioOpts {
  // empty fields fall back to the spec file (or to all/hbnn/bivariate
  // when no spec file is given)
  std::string scenario;
  std::string target_cluster;
  std::string model;
  std::string mode;
  std::filesystem::path scenario_spec;  // optional JSON spec
  std::filesystem::path model_config;
  std::vector<std::uint64_t> seeds;  // empty: spec file / ScenarioSpec default
  int max_epochs = -1;
  int patience = -1;
  int ft_epochs = -1;
  int ft_patience = -1;
  double ft_lr = -1.0;
};

struct EvaluateOpts {
  std::filesystem::path run_dir;
  std::vector<double> confidences = {95.0, 97.0, 99.0};
  bool pinball = false;
  bool raw = false;  // also report in raw (unscaled) units
  std::filesystem::path compare_run_dir;  // optional, enables the DM test
};

struct BenchOpts {
  std::string cluster_id;
  std::string model = "lstmd";
  std::string mode = "bivariate";
  std::filesystem::path model_config;
  int repetitions = 10;
  std::vector<double> fractions = {0.2, 0.4, 0.6, 0.8};
  std::vector<int> steps = {6, 12, 18, 24};
  int max_epochs = 3;  // per timed training run
  std::uint64_t seed = 1;
};

struct ReportOpts {
  // --force doubles as the mixed-hash override.
};

int cmd_preprocess(const GlobalOpts& g, const PreprocessOpts& o);
int cmd_synth(const GlobalOpts& g, const SynthOpts& o);
int cmd_split(const GlobalOpts& g, const SplitOpts& o);
int cmd_train(const GlobalOpts& g, const TrainOpts& o);
int cmd_scenario(const GlobalOpts& g, const ScenarioOpts& o);
int cmd_evaluate(const GlobalOpts& g, const EvaluateOpts& o);
int cmd_bench(const GlobalOpts& g, const BenchOpts& o);
int cmd_report(const GlobalOpts& g, const ReportOpts& o);

}  // namespace cloudcast::cli

#endif  // CLOUDCAST_TOOLS_COMMANDS_HPP_
