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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "cloudcast/errors.hpp"
#include "cloudcast/metrics.hpp"
#include "cloudcast/synth.hpp"
#include "cloudcast/trace.hpp"
#include "test_util.hpp"

using namespace cloudcast;

TEST_CASE("no noise and no amplitude gives a constant series") {
  auto spec = testutil::small_spec(100, 1, 1);
  spec.noise_std = 0.0;
  spec.daily_amplitude = 0.0;
  const auto series = synth::generate_trace(spec, "flat");
  CHECK((series.values.array() == spec.base_level).all());
}

TEST_CASE("generation is deterministic per seed and differs across seeds") {
  const auto spec = testutil::small_spec(500, 2, 42);
  const auto a = synth::generate_trace(spec, "a");
  const auto b = synth::generate_trace(spec, "b");
  CHECK(a.values == b.values);

  auto other = spec;
  other.seed = 43;
  const auto c = synth::generate_trace(other, "c");
  CHECK(a.values != c.values);
}

TEST_CASE("output satisfies the series invariants") {
  const auto series =
      synth::generate_trace(testutil::small_spec(800, 2, 9), "inv");
  const auto report = trace::validate_trace(series);
  CHECK(report.ok());
  CHECK(series.size() == 800);
  CHECK(series.resource_count() == 2);
}

TEST_CASE("innovation cross-correlation is controlled") {
  auto spec = testutil::small_spec(8352, 2, 77);
  spec.cross_correlation = 0.9;
  const auto e = synth::innovations(spec);
  std::vector<double> a(static_cast<std::size_t>(e.rows()));
  std::vector<double> b(a.size());
  for (Eigen::Index i = 0; i < e.rows(); ++i) {
    a[static_cast<std::size_t>(i)] = e(i, 0);
    b[static_cast<std::size_t>(i)] = e(i, 1);
  }
  const double r = eval::pearson(a, b);
  CHECK(r > 0.85);
  CHECK(r < 0.95);
}

TEST_CASE("parameter validation") {
  auto spec = testutil::small_spec(100, 1, 1);
  spec.ar_coefficient = 1.0;
  CHECK_THROWS_AS(synth::generate_trace(spec, "x"), ParameterError);
  spec = testutil::small_spec(100, 3, 1);
  CHECK_THROWS_AS(synth::generate_trace(spec, "x"), ParameterError);
  spec = testutil::small_spec(0, 1, 1);
  CHECK_THROWS_AS(synth::generate_trace(spec, "x"), ParameterError);
  spec = testutil::small_spec(100, 2, 1);
  spec.cross_correlation = 1.5;
  CHECK_THROWS_AS(synth::generate_trace(spec, "x"), ParameterError);
}

TEST_CASE("json spec round-trip") {
  testutil::TempDir tmp("synth");
  auto spec = testutil::small_spec(123, 2, 5);
  spec.cross_correlation = -0.4;
  const auto path = tmp.path() / "spec.json";
  {
    std::ofstream out(path);
    out << spec.to_json();
  }
  const auto back = synth::SynthSpec::from_json_file(path);
  CHECK(back.length == spec.length);
  CHECK(back.resources == spec.resources);
  CHECK(back.cross_correlation == spec.cross_correlation);
  CHECK(back.seed == spec.seed);
  CHECK(synth::generate_trace(back, "x").values ==
        synth::generate_trace(spec, "x").values);
}
