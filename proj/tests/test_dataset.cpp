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
#include <set>

#include "cloudcast/errors.hpp"
#include "cloudcast/rng.hpp"
#include "cloudcast/scaler.hpp"
#include "cloudcast/synth.hpp"
#include "cloudcast/windowing.hpp"
#include "test_util.hpp"

using namespace cloudcast;

namespace {

trace::TraceSeries series_from(const std::vector<double>& values) {
  trace::TraceSeries s;
  s.cluster_id = "c";
  s.resources = {"cpu"};
  s.window_seconds = 300;
  s.values.resize(static_cast<Eigen::Index>(values.size()), 1);
  for (std::size_t i = 0; i < values.size(); ++i) {
    s.timestamps.push_back(static_cast<std::int64_t>(i) * 300);
    s.values(static_cast<Eigen::Index>(i), 0) = values[i];
  }
  return s;
}

}  // namespace

TEST_CASE("scaler fits on the training portion only") {
  const auto s = series_from({2.0, 4.0, 3.0, 2.5, 100.0});  // 100 is test-only
  const auto scaler = data::MinMaxScaler::fit(s, 0.8);
  CHECK(scaler.min()(0) == 2.0);
  CHECK(scaler.max()(0) == 4.0);

  Eigen::MatrixXd v(3, 1);
  v << 2.0, 4.0, 5.0;
  const auto scaled = scaler.transform(v);
  CHECK(scaled(0, 0) == doctest::Approx(0.0));
  CHECK(scaled(1, 0) == doctest::Approx(1.0));
  CHECK(scaled(2, 0) == doctest::Approx(1.5));  // out-of-range is allowed

  // a spiked test maximum must not change the fitted scaler
  const auto spiked = series_from({2.0, 4.0, 3.0, 2.5, 1e6});
  const auto refit = data::MinMaxScaler::fit(spiked, 0.8);
  CHECK(refit.min()(0) == scaler.min()(0));
  CHECK(refit.max()(0) == scaler.max()(0));
}

TEST_CASE("scaling round-trips within 1e-9 relative") {
  const auto series =
      synth::generate_trace(testutil::small_spec(400, 2, 12), "rt");
  const auto scaler = data::MinMaxScaler::fit(series);
  const auto scaled = data::scale(series, scaler);
  const auto back = data::inverse_scale(scaled.values, scaler);
  for (Eigen::Index i = 0; i < series.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < series.values.cols(); ++j) {
      CHECK(back(i, j) ==
            doctest::Approx(series.values(i, j)).epsilon(1e-9));
    }
  }
}

TEST_CASE("constant training portion is a degenerate-scale error") {
  const auto s = series_from({1.0, 1.0, 1.0, 1.0, 2.0});
  CHECK_THROWS_AS(data::MinMaxScaler::fit(s, 0.8), DegenerateScaleError);
}

TEST_CASE("scaler json round-trip") {
  testutil::TempDir tmp("scaler");
  const auto series =
      synth::generate_trace(testutil::small_spec(100, 2, 4), "s");
  const auto scaler = data::MinMaxScaler::fit(series);
  scaler.save(tmp.path() / "scaler.json");
  const auto back = data::MinMaxScaler::load(tmp.path() / "scaler.json");
  CHECK(back.min() == scaler.min());
  CHECK(back.max() == scaler.max());
  CHECK(back.resources() == scaler.resources());
}

TEST_CASE("window counts follow T - L - H + 1") {
  auto mk = [](std::int64_t n) {
    return synth::generate_trace(testutil::small_spec(n, 1, 2), "w");
  };
  CHECK(data::make_windows(mk(8352)).size() == 8063);
  CHECK(data::make_windows(mk(290)).size() == 1);
  CHECK_THROWS_AS(data::make_windows(mk(289)), DataError);

  // target sits input_len + horizon - 1 after the window start
  const auto windows = data::make_windows(mk(300), 288, 2);
  CHECK(windows[0].target_index == 289);
  CHECK(windows.back().target_index == 299);
}

TEST_CASE("window contents reconstruct the series") {
  const auto series =
      synth::generate_trace(testutil::small_spec(120, 1, 6), "rc");
  const auto scaler = data::MinMaxScaler::fit(series);
  const auto scaled = data::scale(series, scaler);
  const auto windows = data::make_windows(scaled, 24, 2);
  // consecutive windows shift by one step; stitching first rows + the last
  // window reproduces the scaled series prefix
  for (std::size_t i = 0; i < windows.size(); ++i) {
    CHECK(windows[i].input(0, 0) ==
          scaled.values(static_cast<Eigen::Index>(i), 0));
    CHECK(windows[i].target(0) ==
          scaled.values(windows[i].target_index, 0));
  }
}

TEST_CASE("split honours the 80/20 cut and leak-freedom") {
  const auto series =
      synth::generate_trace(testutil::small_spec(8352, 1, 21), "sp");
  const auto bundle =
      data::split(series, data::ResourceSelector::univariate("cpu"));

  CHECK(bundle.train_end == 6681);  // floor(0.8 * 8352)
  for (const auto& ref : bundle.test) {
    CHECK(ref.target >= bundle.train_end);
    CHECK(ref.start >= bundle.train_end);  // inputs stay in the test region
  }
  std::set<std::int32_t> train_targets;
  for (const auto& ref : bundle.train) {
    CHECK(ref.target < bundle.train_end);
    train_targets.insert(ref.target);
  }
  for (const auto& ref : bundle.val) {
    CHECK(ref.target < bundle.train_end);
    train_targets.insert(ref.target);
  }
  for (const auto& ref : bundle.test) {
    CHECK(train_targets.count(ref.target) == 0);
  }

  // val is the contiguous tail of the training windows
  const auto n_trainval = bundle.train.size() + bundle.val.size();
  CHECK(bundle.val.size() ==
        static_cast<std::size_t>(0.2 * static_cast<double>(n_trainval)));
  for (std::size_t i = 0; i + 1 < bundle.val.size(); ++i) {
    CHECK(bundle.val[i + 1].target == bundle.val[i].target + 1);
  }
  CHECK(bundle.val.front().target == bundle.train.back().target + 1);
}

TEST_CASE("split needs data in every partition") {
  const auto series =
      synth::generate_trace(testutil::small_spec(300, 1, 2), "tiny");
  CHECK_THROWS_AS(
      data::split(series, data::ResourceSelector::univariate("cpu"), 288, 2),
      DataError);
}

TEST_CASE("merge_shuffle is deterministic, complete and type-checked") {
  const auto b1 = testutil::small_bundle(700, 1, 1);
  const auto b2 = testutil::small_bundle(650, 1, 2);
  const auto b3 = testutil::small_bundle(600, 1, 3);

  const auto stream =
      data::merge_shuffle({&b1, &b2, &b3}, 99);
  CHECK(stream.train.size() ==
        b1.train.size() + b2.train.size() + b3.train.size());
  CHECK(stream.val.size() == b1.val.size() + b2.val.size() + b3.val.size());

  const auto again = data::merge_shuffle({&b1, &b2, &b3}, 99);
  for (std::size_t i = 0; i < stream.train.size(); ++i) {
    CHECK(stream.train[i].bundle == again.train[i].bundle);
    CHECK(stream.train[i].ref.target == again.train[i].ref.target);
  }
  const auto different = data::merge_shuffle({&b1, &b2, &b3}, 100);
  bool same_order = true;
  for (std::size_t i = 0; i < stream.train.size(); ++i) {
    if (stream.train[i].bundle != different.train[i].bundle ||
        stream.train[i].ref.target != different.train[i].ref.target) {
      same_order = false;
      break;
    }
  }
  CHECK(!same_order);

  // single bundle: a permutation of its own training windows
  const auto solo = data::merge_shuffle({&b1}, 5);
  std::multiset<std::int32_t> expect, got;
  for (const auto& r : b1.train) expect.insert(r.target);
  for (const auto& s : solo.train) got.insert(s.ref.target);
  CHECK(expect == got);

  const auto bi = testutil::small_bundle(700, 2, 4);
  CHECK_THROWS_AS(data::merge_shuffle({&b1, &bi}, 1), ParameterError);
}

TEST_CASE("bundle persistence round-trips") {
  testutil::TempDir tmp("bundle");
  const auto bundle = testutil::small_bundle(700, 2, 8);
  data::save_bundle(bundle, tmp.path() / "b", 8);
  const auto back = data::load_bundle(tmp.path() / "b");

  CHECK(back.cluster_id == bundle.cluster_id);
  CHECK(back.resources == bundle.resources);
  CHECK(back.train.size() == bundle.train.size());
  CHECK(back.val.size() == bundle.val.size());
  CHECK(back.test.size() == bundle.test.size());
  CHECK(back.train_end == bundle.train_end);
  CHECK((back.series - bundle.series).cwiseAbs().maxCoeff() == 0.0);
  for (std::size_t i = 0; i < bundle.test.size(); ++i) {
    CHECK(back.test[i].start == bundle.test[i].start);
    CHECK(back.test[i].target == bundle.test[i].target);
  }

  // the documented sample-matrix layout: flattened input then targets
  std::ifstream bin(tmp.path() / "b" / "test.bin", std::ios::binary);
  REQUIRE(bin.good());
  const auto sample = bundle.materialize(bundle.test[0]);
  const Eigen::Index r = bundle.resource_count();
  std::vector<double> row(static_cast<std::size_t>(bundle.input_len * r + r));
  bin.read(reinterpret_cast<char*>(row.data()),
           static_cast<std::streamsize>(row.size() * sizeof(double)));
  CHECK(row[0] == sample.input(0, 0));
  CHECK(row[1] == sample.input(0, 1));
  CHECK(row[row.size() - 2] == sample.target(0));
  CHECK(row.back() == sample.target(1));
}
