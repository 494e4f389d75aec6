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

#include <cmath>
#include <sstream>

#include "cloudcast/errors.hpp"
#include "cloudcast/rng.hpp"
#include "cloudcast/trace.hpp"
#include "cloudcast/trace_io.hpp"
#include "test_util.hpp"

using namespace cloudcast;
using trace::UsageEvent;

namespace {

UsageEvent ev(std::int64_t start, std::int64_t end, double cpu) {
  return {start, end, {{"cpu", cpu}}};
}

}  // namespace

TEST_CASE("full-overlap event lands with weight 1") {
  const auto result =
      trace::aggregate_events({ev(0, 300, 2.0)}, 300, 0, 300, "c", {"cpu"});
  REQUIRE(result.series.size() == 1);
  CHECK(result.series.values(0, 0) == doctest::Approx(2.0));
}

TEST_CASE("half-window overlap halves the contribution") {
  const auto result =
      trace::aggregate_events({ev(0, 150, 2.0)}, 300, 0, 300, "c", {"cpu"});
  CHECK(result.series.values(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("concurrent events add up") {
  const auto result = trace::aggregate_events(
      {ev(0, 300, 1.0), ev(0, 300, 3.0)}, 300, 0, 300, "c", {"cpu"});
  CHECK(result.series.values(0, 0) == doctest::Approx(4.0));
}

TEST_CASE("weight conservation for events inside the range") {
  rng::PortableRng gen(5);
  for (int trial = 0; trial < 50; ++trial) {
    const std::int64_t start = 300 + static_cast<std::int64_t>(gen.bounded(1200));
    const std::int64_t dur = 1 + static_cast<std::int64_t>(gen.bounded(1500));
    const double usage = gen.uniform(0.1, 5.0);
    REQUIRE(start + dur <= 3000);  // fully inside the aggregation range
    const auto result = trace::aggregate_events(
        {ev(0, 3000, 0.5), ev(start, start + dur, usage)}, 300, 0, 3000, "c",
        {"cpu"});
    // subtract the filler event's mass; what remains must equal
    // usage * duration / window
    const double total = result.series.values.col(0).sum() -
                         0.5 * static_cast<double>(result.series.size());
    CHECK(total ==
          doctest::Approx(usage * static_cast<double>(dur) / 300.0)
              .epsilon(1e-9));
  }
}

TEST_CASE("aggregation is permutation invariant and non-negative") {
  std::vector<UsageEvent> events;
  rng::PortableRng gen(7);
  for (int i = 0; i < 40; ++i) {
    const auto s = static_cast<std::int64_t>(gen.bounded(5000));
    events.push_back(ev(s, s + 1 + static_cast<std::int64_t>(gen.bounded(900)),
                        gen.uniform(0.0, 3.0)));
  }
  auto shuffled = events;
  gen.shuffle(shuffled);
  const auto a = trace::aggregate_events(events, 300, 0, 6000, "c", {"cpu"});
  const auto b = trace::aggregate_events(shuffled, 300, 0, 6000, "c", {"cpu"});
  // summation order may differ, so equality is up to fp round-off
  CHECK((a.series.values - b.series.values).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((a.series.values.array() >= 0.0).all());
}

TEST_CASE("interior gaps are interpolated and reported, edges trimmed") {
  // coverage: windows 1 and 4 of [0, 1800); 0,5 empty (trimmed), 2-3 gap
  const std::vector<UsageEvent> events = {ev(300, 600, 2.0),
                                          ev(1200, 1500, 4.0)};
  const auto result =
      trace::aggregate_events(events, 300, 0, 1800, "c", {"cpu"});
  REQUIRE(result.series.size() == 4);  // windows 1..4
  CHECK(result.series.timestamps.front() == 300);
  CHECK(result.gaps.interpolated_indices == std::vector<std::int64_t>{1, 2});
  CHECK(result.series.values(1, 0) == doctest::Approx(2.0 + 2.0 / 3.0));
  CHECK(result.series.values(2, 0) == doctest::Approx(2.0 + 4.0 / 3.0));
  // grid is uniform after gap handling
  CHECK(trace::validate_trace(result.series).ok());
}

TEST_CASE("bad records are rejected and counted; empty input errors") {
  auto nan_event = ev(0, 300, std::nan(""));
  auto negative = ev(0, 300, -1.0);
  auto inverted = ev(700, 500, 1.0);
  const auto result = trace::aggregate_events(
      {ev(0, 300, 1.0), nan_event, negative, inverted}, 300, 0, 300, "c",
      {"cpu"});
  CHECK(result.gaps.rejected_records == 3);
  CHECK(result.series.values(0, 0) == doctest::Approx(1.0));

  CHECK_THROWS_AS(trace::aggregate_events({}, 300, 0, 300, "c", {"cpu"}),
                  DataError);
  CHECK_THROWS_AS(
      trace::aggregate_events({nan_event}, 300, 0, 300, "c", {"cpu"}),
      DataError);
  CHECK_THROWS_AS(
      trace::aggregate_events({ev(0, 300, 1.0)}, 300, 0, 301, "c", {"cpu"}),
      ParameterError);
}

TEST_CASE("validate_trace flags spacing, range and NaN issues") {
  trace::TraceSeries s;
  s.cluster_id = "c";
  s.resources = {"cpu"};
  s.window_seconds = 300;
  s.timestamps = {0, 300, 900, 1200};  // one 600 s gap after index 1
  s.values.resize(4, 1);
  s.values << 1.0, -2.0, std::nan(""), 0.5;

  const auto report = trace::validate_trace(s);
  CHECK(report.spacing_violations == std::vector<std::int64_t>{1});
  CHECK(report.negative_count == 1);
  CHECK(report.non_finite_count == 1);
  CHECK(!report.ok());

  trace::TraceSeries uniform;
  uniform.cluster_id = "c";
  uniform.resources = {"cpu"};
  uniform.window_seconds = 300;
  uniform.timestamps = {0, 300, 600};
  uniform.values = Eigen::MatrixXd::Constant(3, 1, 1.0);
  CHECK(trace::validate_trace(uniform).ok());
  CHECK(trace::validate_trace(uniform).duration_days ==
        doctest::Approx(900.0 / 86400.0));
}

TEST_CASE("event csv parsing with canonical and mapped schemas") {
  std::istringstream canonical(
      "start_time,end_time,cpu,memory\n"
      "0,300,1.5,0.75\n"
      "150,450,2.0,1.0\n");
  const auto file = trace::read_events_csv(canonical);
  REQUIRE(file.events.size() == 2);
  CHECK(file.resources == std::vector<std::string>{"cpu", "memory"});
  CHECK(file.events[1].usage.at("memory") == doctest::Approx(1.0));

  std::istringstream mapped(
      "start_time,end_time,average_usage_cpus,average_usage_memory\n"
      "0,300,0.5,0.25\n");
  const auto google =
      trace::read_events_csv(mapped, trace::EventSchema::google_cluster());
  CHECK(google.resources == std::vector<std::string>{"cpu", "memory"});
  CHECK(google.events[0].usage.at("cpu") == doctest::Approx(0.5));
}

TEST_CASE("trace csv and gap report round-trip") {
  testutil::TempDir tmp("trace_io");
  const auto series =
      synth::generate_trace(testutil::small_spec(50, 2, 3), "rt");
  const auto path = tmp.path() / "rt.csv";
  trace::write_trace_csv(path, series);
  const auto back = trace::read_trace_csv(path, "rt");
  REQUIRE(back.size() == series.size());
  CHECK(back.resources == series.resources);
  CHECK((back.values - series.values).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(back.timestamps == series.timestamps);

  trace::GapReport gaps;
  gaps.cluster_id = "rt";
  gaps.interpolated_indices = {3, 4, 9};
  gaps.rejected_records = 2;
  const auto gpath = tmp.path() / "gaps.json";
  trace::write_gap_report_json(gpath, gaps);
  const auto gback = trace::read_gap_report_json(gpath);
  CHECK(gback.cluster_id == gaps.cluster_id);
  CHECK(gback.interpolated_indices == gaps.interpolated_indices);
  CHECK(gback.rejected_records == gaps.rejected_records);
}
