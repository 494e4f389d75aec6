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

#ifndef CLOUDCAST_TESTS_TEST_UTIL_HPP_
#define CLOUDCAST_TESTS_TEST_UTIL_HPP_

#include <filesystem>
#include <random>
#include <string>

#include "cloudcast/model.hpp"
#include "cloudcast/synth.hpp"
#include "cloudcast/windowing.hpp"

namespace cloudcast::testutil {

/// Scratch directory removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("cloudcast_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline synth::SynthSpec small_spec(std::int64_t length, int resources,
                                   std::uint64_t seed) {
  synth::SynthSpec spec;
  spec.length = length;
  spec.resources = resources;
  spec.daily_amplitude = 0.25;
  spec.ar_coefficient = 0.6;
  spec.noise_std = 0.05;
  spec.base_level = 1.0;
  spec.cross_correlation = resources == 2 ? 0.3 : 0.0;
  spec.seed = seed;
  return spec;
}

inline data::SplitBundle small_bundle(std::int64_t length, int resources,
                                      std::uint64_t seed, int input_len = 48,
                                      int horizon = 2) {
  const auto series =
      synth::generate_trace(small_spec(length, resources, seed), "t" +
                            std::to_string(seed));
  return data::split(series,
                     resources == 2
                         ? data::ResourceSelector::all()
                         : data::ResourceSelector::univariate("cpu"),
                     input_len, horizon);
}

inline models::ModelConfig tiny_config(models::ModelKind kind, int resources) {
  models::ModelConfig config;
  config.kind = kind;
  config.conv_blocks = 1;
  config.conv_kernels = {{4, 3}};
  config.lstm_units = 8;
  config.dense_stack = {8};
  config.output_resources = resources;
  config.batch_size = 64;
  config.learning_rate = 3e-3;
  return config;
}

}  // namespace cloudcast::testutil

#endif  // CLOUDCAST_TESTS_TEST_UTIL_HPP_
