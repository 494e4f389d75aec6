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

#include "cloudcast/bench.hpp"
#include "cloudcast/errors.hpp"
#include "test_util.hpp"

using namespace cloudcast;

namespace {

models::TrainedModel quick_model(const data::SplitBundle& bundle) {
  models::TrainOptions opts;
  opts.max_epochs = 1;
  opts.patience = 1;
  opts.seed = 2;
  return models::train(
      testutil::tiny_config(models::ModelKind::kDistributional, 1), bundle,
      opts);
}

}  // namespace

TEST_CASE("training bench has one row per fraction with recomputable means") {
  const auto bundle = testutil::small_bundle(420, 1, 6, 24);
  auto config = testutil::tiny_config(models::ModelKind::kDistributional, 1);
  models::TrainOptions opts;
  opts.max_epochs = 1;
  opts.patience = 1;
  opts.seed = 1;

  const std::vector<double> fractions = {0.2, 0.4, 0.6, 0.8};
  const auto cells = bench::bench_training(config, bundle, fractions, opts, 3);
  REQUIRE(cells.size() == 4);
  for (const auto& cell : cells) {
    CHECK(cell.repetitions == 3);
    CHECK(cell.runs_s.size() == 3);
    double mean = 0.0;
    for (const double r : cell.runs_s) mean += r;
    mean /= 3.0;
    CHECK(cell.mean_s == doctest::Approx(mean).epsilon(1e-12));
    CHECK(cell.mean_s > 0.0);
  }

  const std::vector<double> half = {0.5};
  const auto single = bench::bench_training(config, bundle, half, opts, 1);
  CHECK(single[0].std_s == 0.0);

  const std::vector<double> tiny_frac = {1e-9};
  CHECK_THROWS_AS(bench::bench_training(config, bundle, tiny_frac, opts, 1),
                  DataError);
}

TEST_CASE("finetune bench never mutates the model under test") {
  const auto bundle = testutil::small_bundle(420, 1, 6, 24);
  const auto model = quick_model(bundle);
  const auto hash = model.weights_hash();

  scenarios::FineTuneOptions ft;
  ft.max_epochs = 1;
  ft.patience = 1;
  const std::vector<int> steps = {6, 12, 18, 24};
  const auto cells = bench::bench_finetune(model, bundle, steps, ft, 2);
  REQUIRE(cells.size() == 4);
  CHECK(model.weights_hash() == hash);
  for (const auto& cell : cells) CHECK(cell.mean_s > 0.0);

  const std::vector<int> zero_steps = {0};
  CHECK_THROWS_AS(bench::bench_finetune(model, bundle, zero_steps, ft, 1),
                  ParameterError);
  const std::vector<int> huge_steps = {100000};
  CHECK_THROWS_AS(bench::bench_finetune(model, bundle, huge_steps, ft, 1),
                  DataError);
}

TEST_CASE("inference bench reports a positive median latency") {
  const auto bundle = testutil::small_bundle(420, 1, 6, 24);
  const auto model = quick_model(bundle);
  const auto cell = bench::bench_inference(model, bundle, 21);
  CHECK(cell.mean_s > 0.0);
  CHECK(cell.runs_s.size() == 21);  // warm-up call is not in the set
  std::vector<double> sorted = cell.runs_s;
  std::sort(sorted.begin(), sorted.end());
  CHECK(cell.mean_s == doctest::Approx(sorted[10]));  // odd count: middle
}

TEST_CASE("report files round-trip through the raw log") {
  testutil::TempDir tmp("bench");
  const auto bundle = testutil::small_bundle(420, 1, 6, 24);
  auto config = testutil::tiny_config(models::ModelKind::kDistributional, 1);
  models::TrainOptions opts;
  opts.max_epochs = 1;
  opts.patience = 1;
  opts.seed = 1;

  bench::RuntimeReport report;
  report.model_label = "lstmd_test";
  const std::vector<double> fracs = {0.5, 1.0};
  report.training = bench::bench_training(config, bundle, fracs, opts, 2);
  const auto model = quick_model(bundle);
  scenarios::FineTuneOptions ft;
  ft.max_epochs = 1;
  const std::vector<int> step_counts = {6, 12};
  report.finetune = bench::bench_finetune(model, bundle, step_counts, ft, 2);
  report.inference = bench::bench_inference(model, bundle, 5);

  bench::write_report_csv(tmp.path() / "runtime.csv", report);
  bench::write_raw_log(tmp.path() / "raw.jsonl", report);
  const auto back = bench::read_raw_log(tmp.path() / "raw.jsonl");
  CHECK(back.model_label == report.model_label);
  REQUIRE(back.training.size() == 2);
  REQUIRE(back.finetune.size() == 2);
  for (std::size_t i = 0; i < back.training.size(); ++i) {
    CHECK(back.training[i].runs_s == report.training[i].runs_s);
    CHECK(back.training[i].mean_s == report.training[i].mean_s);
  }
  CHECK(back.inference.runs_s == report.inference.runs_s);
}

TEST_CASE("the lock file enforces exclusive benchmarking") {
  testutil::TempDir tmp("lock");
  {
    bench::ExclusiveLock lock(tmp.path() / ".lock");
    CHECK_THROWS_AS(bench::ExclusiveLock(tmp.path() / ".lock"), ArtifactError);
  }
  bench::ExclusiveLock again(tmp.path() / ".lock");  // released on scope exit
}
