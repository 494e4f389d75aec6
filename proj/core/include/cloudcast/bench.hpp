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

#ifndef CLOUDCAST_BENCH_HPP_
#define CLOUDCAST_BENCH_HPP_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cloudcast/model.hpp"
#include "cloudcast/scenarios.hpp"
#include "cloudcast/windowing.hpp"

namespace cloudcast::bench {

/// One timed cell: raw per-run wall-clock seconds plus their mean/std so
/// the summary stays recomputable from the log.
struct RuntimeCell {
  std::string label;
  std::vector<double> runs_s;
  double mean_s = 0.0;
  double std_s = 0.0;
  int repetitions = 0;
};

struct RuntimeReport {
  std::string model_label;
  std::vector<RuntimeCell> training;   // one per training fraction
  std::vector<RuntimeCell> finetune;   // one per step count
  RuntimeCell inference;               // single-sample latency
};

inline const std::vector<double> kDefaultFractions = {0.2, 0.4, 0.6, 0.8};
inline const std::vector<int> kDefaultStepCounts = {6, 12, 18, 24};

/// Times full training runs on the leading fraction of the training split.
/// Mean over `repetitions` runs (wall clock, monotonic).
std::vector<RuntimeCell> bench_training(const models::ModelConfig& config,
                                        const data::SplitBundle& bundle,
                                        std::span<const double> fractions,
                                        const models::TrainOptions& opts,
                                        int repetitions = 10);

/// Times fine-tuning passes over the `steps` most recent training samples
/// (steps are newest-sample counts: 6/12/18/24 samples = 30-120 minutes of
/// fresh data). The model under test is never mutated.
std::vector<RuntimeCell> bench_finetune(const models::TrainedModel& model,
                                        const data::SplitBundle& bundle,
                                        std::span<const int> step_counts,
                                        const scenarios::FineTuneOptions& opts,
                                        int repetitions = 10);

/// Median wall time of >= `samples` single-sample predictions; the first
/// (warm-up) call is excluded from the median set.
RuntimeCell bench_inference(const models::TrainedModel& model,
                            const data::SplitBundle& bundle,
                            int samples = 100);

/// CSV with one row per cell: kind,label,mean_s,std_s,repetitions.
void write_report_csv(const std::filesystem::path& path,
                      const RuntimeReport& report);

/// JSON-lines raw log, one object per cell with every run time.
void write_raw_log(const std::filesystem::path& path,
                   const RuntimeReport& report);
RuntimeReport read_raw_log(const std::filesystem::path& path);

/// Benchmarks run exclusively; the lock file blocks concurrent runs on the
/// same report directory. Throws ArtifactError when already held.
class ExclusiveLock {
 public:
  explicit ExclusiveLock(std::filesystem::path path);
  ~ExclusiveLock();
  ExclusiveLock(const ExclusiveLock&) = delete;
  ExclusiveLock& operator=(const ExclusiveLock&) = delete;

 private:
  std::filesystem::path path_;
};

}  // namespace cloudcast::bench

#endif  // CLOUDCAST_BENCH_HPP_
