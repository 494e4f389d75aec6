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

#ifndef CLOUDCAST_SYNTH_HPP_
#define CLOUDCAST_SYNTH_HPP_

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <string>

#include "cloudcast/trace.hpp"

namespace cloudcast::synth {

/// Synthetic workload model: daily sinusoid + AR(1) noise, clipped at zero.
/// At 5-minute resolution one day is 288 points.
struct SynthSpec {
  std::int64_t length = 8352;     // points
  int resources = 1;              // 1 or 2
  double daily_amplitude = 0.2;
  double ar_coefficient = 0.6;    // |phi| < 1
  double noise_std = 0.05;        // innovation std, >= 0
  double base_level = 1.0;        // > 0
  double cross_correlation = 0.0;  // innovation correlation for 2 resources
  std::uint64_t seed = 0;
  std::int64_t start_time = 1609459200;  // grid origin, epoch seconds

  void validate() const;  // throws ParameterError

  static SynthSpec from_json_file(const std::filesystem::path& path);
  std::string to_json() const;
};

/// Raw innovation draws (length x resources) with the requested std
/// and cross-correlation. Exposed so the correlation contract is testable.
Eigen::MatrixXd innovations(const SynthSpec& spec);

/// Deterministic per seed. value_t = max(0, base + A*sin(2*pi*t/288) + n_t)
/// with n_t = phi*n_{t-1} + e_t.
trace::TraceSeries generate_trace(const SynthSpec& spec,
                                  std::string cluster_id);

}  // namespace cloudcast::synth

#endif  // CLOUDCAST_SYNTH_HPP_
