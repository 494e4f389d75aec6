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

#ifndef CLOUDCAST_WINDOWING_HPP_
#define CLOUDCAST_WINDOWING_HPP_

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cloudcast/scaler.hpp"
#include "cloudcast/trace.hpp"

namespace cloudcast::data {

inline constexpr int kDefaultInputLen = 288;   // 24 h of 5-minute windows
inline constexpr int kDefaultHorizonSteps = 2;  // 10 minutes ahead

/// Picks which resource columns a model sees.
struct ResourceSelector {
  bool bivariate = false;
  std::string resource;  // used when univariate

  static ResourceSelector univariate(std::string name) {
    return {false, std::move(name)};
  }
  static ResourceSelector all() { return {true, {}}; }

  std::string label() const {
    return bivariate ? "bivariate" : "univariate:" + resource;
  }
};

/// One training example: `input_len` consecutive scaled observations and
/// the scaled demand `horizon_steps` windows after the last observation.
struct WindowSample {
  std::string cluster_id;
  Eigen::MatrixXd input;   // input_len x R
  Eigen::VectorXd target;  // R
  std::int64_t target_index = 0;  // row in the source series
};

/// Sample addressed by position; windows overlap heavily, so bundles store
/// one copy of the series and reference rows instead of materializing.
struct SampleRef {
  std::int32_t start = 0;   // first input row
  std::int32_t target = 0;  // target row == start + input_len + horizon - 1
};

/// Enumerates every sliding window of an already-scaled series.
/// Count: T - input_len - horizon_steps + 1. Throws DataError if T is
/// too short for one sample.
std::vector<WindowSample> make_windows(
    const trace::TraceSeries& scaled, int input_len = kDefaultInputLen,
    int horizon_steps = kDefaultHorizonSteps,
    const ResourceSelector& selector = ResourceSelector::all());

/// Leak-free train/val/test windows over one cluster. Targets in the final
/// 20% of the series form the test region; test windows lie entirely inside
/// it (samples straddling the cut are dropped). Validation is the contiguous
/// final 20% of the training windows.
struct SplitBundle {
  std::string cluster_id;
  std::vector<std::string> resources;  // selected columns
  int input_len = kDefaultInputLen;
  int horizon_steps = kDefaultHorizonSteps;
  Eigen::MatrixXd series;  // scaled, T x R
  MinMaxScaler scaler;
  std::vector<SampleRef> train, val, test;
  std::int64_t train_end = 0;   // first test-region row
  std::int64_t test_start = 0;  // == train_end

  Eigen::Index resource_count() const { return series.cols(); }
  WindowSample materialize(const SampleRef& ref) const;
  /// Scaled actual target values for a sample list (rows align with refs).
  Eigen::MatrixXd targets(const std::vector<SampleRef>& refs) const;
};

/// Scales (fitting on the training portion), windows and partitions a raw
/// series. Throws DataError when any partition would be empty.
SplitBundle split(const trace::TraceSeries& raw,
                  const ResourceSelector& selector = ResourceSelector::all(),
                  int input_len = kDefaultInputLen,
                  int horizon_steps = kDefaultHorizonSteps,
                  double train_fraction = 0.8, double val_fraction = 0.2);

/// A sample in a (possibly merged) training stream.
struct StreamSample {
  const SplitBundle* bundle = nullptr;
  SampleRef ref;
};

/// Merged multi-cluster training stream. Training samples are shuffled
/// deterministically; validation stays in per-cluster concatenation order
/// (test sets remain in their bundles, evaluation is per cluster).
struct TrainStream {
  std::vector<StreamSample> train;
  std::vector<StreamSample> val;
  int input_len = kDefaultInputLen;
  int horizon_steps = kDefaultHorizonSteps;
  Eigen::Index resource_count = 0;
};

TrainStream merge_shuffle(const std::vector<const SplitBundle*>& bundles,
                          std::uint64_t seed);

/// Convenience single-cluster stream (same deterministic shuffle).
TrainStream to_stream(const SplitBundle& bundle, std::uint64_t seed);

/// Bundle directory layout:
///   scaler.json, meta.json,
///   {train,val,test}.bin   - float64 rows: input_len*R inputs then R targets
///   {train,val,test}_index.csv - cluster_id,target_index per row
///   series.bin             - scaled source series, row-major float64
void save_bundle(const SplitBundle& bundle, const std::filesystem::path& dir,
                 std::uint64_t seed = 0);
SplitBundle load_bundle(const std::filesystem::path& dir);

}  // namespace cloudcast::data

#endif  // CLOUDCAST_WINDOWING_HPP_
