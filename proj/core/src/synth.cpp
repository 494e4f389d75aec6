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

#include "cloudcast/synth.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>

#include "cloudcast/errors.hpp"
#include "cloudcast/rng.hpp"

namespace cloudcast::synth {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr int kPointsPerDay = 288;
}  // namespace

void SynthSpec::validate() const {
  if (length < 1) throw ParameterError("length must be >= 1");
  if (resources != 1 && resources != 2) {
    throw ParameterError("resources must be 1 or 2");
  }
  if (!(std::abs(ar_coefficient) < 1.0)) {
    throw ParameterError("|ar_coefficient| must be < 1");
  }
  if (noise_std < 0.0) throw ParameterError("noise_std must be >= 0");
  if (base_level <= 0.0) throw ParameterError("base_level must be > 0");
  if (cross_correlation < -1.0 || cross_correlation > 1.0) {
    throw ParameterError("cross_correlation must be in [-1, 1]");
  }
}

SynthSpec SynthSpec::from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ArtifactError("cannot open synth spec: " + path.string());
  nlohmann::json j;
  in >> j;
  SynthSpec spec;
  spec.length = j.value("length", spec.length);
  spec.resources = j.value("resources", spec.resources);
  spec.daily_amplitude = j.value("daily_amplitude", spec.daily_amplitude);
  spec.ar_coefficient = j.value("ar_coefficient", spec.ar_coefficient);
  spec.noise_std = j.value("noise_std", spec.noise_std);
  spec.base_level = j.value("base_level", spec.base_level);
  spec.cross_correlation = j.value("cross_correlation", spec.cross_correlation);
  spec.seed = j.value("seed", spec.seed);
  spec.start_time = j.value("start_time", spec.start_time);
  spec.validate();
  return spec;
}

std::string SynthSpec::to_json() const {
  nlohmann::json j;
  j["length"] = length;
  j["resources"] = resources;
  j["daily_amplitude"] = daily_amplitude;
  j["ar_coefficient"] = ar_coefficient;
  j["noise_std"] = noise_std;
  j["base_level"] = base_level;
  j["cross_correlation"] = cross_correlation;
  j["seed"] = seed;
  j["start_time"] = start_time;
  return j.dump(2);
}

Eigen::MatrixXd innovations(const SynthSpec& spec) {
  spec.validate();
  rng::PortableRng gen(spec.seed);
  Eigen::MatrixXd e(spec.length, spec.resources);
  const double rho = spec.cross_correlation;
  const double ortho = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  for (Eigen::Index t = 0; t < spec.length; ++t) {
    const double z1 = gen.normal();
    e(t, 0) = spec.noise_std * z1;
    if (spec.resources == 2) {
      const double z2 = gen.normal();
      e(t, 1) = spec.noise_std * (rho * z1 + ortho * z2);
    }
  }
  return e;
}

trace::TraceSeries generate_trace(const SynthSpec& spec,
                                  std::string cluster_id) {
  const Eigen::MatrixXd e = innovations(spec);  // validates

  trace::TraceSeries series;
  series.cluster_id = std::move(cluster_id);
  series.resources =
      spec.resources == 1 ? std::vector<std::string>{"cpu"}
                          : std::vector<std::string>{"cpu", "memory"};
  series.window_seconds = 300;
  series.timestamps.resize(static_cast<std::size_t>(spec.length));
  series.values.resize(spec.length, spec.resources);

  Eigen::VectorXd ar = Eigen::VectorXd::Zero(spec.resources);
  for (Eigen::Index t = 0; t < spec.length; ++t) {
    series.timestamps[static_cast<std::size_t>(t)] =
        spec.start_time + t * series.window_seconds;
    const double seasonal =
        spec.daily_amplitude *
        std::sin(kTwoPi * static_cast<double>(t) / kPointsPerDay);
    for (Eigen::Index r = 0; r < spec.resources; ++r) {
      ar(r) = spec.ar_coefficient * ar(r) + e(t, r);
      series.values(t, r) = std::max(0.0, spec.base_level + seasonal + ar(r));
    }
  }
  return series;
}

}  // namespace cloudcast::synth
