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

#include <benchmark/benchmark.h>

#include <vector>

#include "cloudcast/metrics.hpp"
#include "cloudcast/model.hpp"
#include "cloudcast/rng.hpp"
#include "cloudcast/synth.hpp"
#include "cloudcast/trace.hpp"
#include "cloudcast/windowing.hpp"

namespace {

using namespace cloudcast;

void BM_AggregateEvents(benchmark::State& state) {
  const auto n_events = static_cast<std::size_t>(state.range(0));
  rng::PortableRng gen(1);
  std::vector<trace::UsageEvent> events;
  events.reserve(n_events);
  for (std::size_t i = 0; i < n_events; ++i) {
    const auto start = static_cast<std::int64_t>(gen.bounded(86400));
    events.push_back(
        {start, start + 1 + static_cast<std::int64_t>(gen.bounded(3600)),
         {{"cpu", gen.uniform(0.0, 4.0)}, {"memory", gen.uniform(0.0, 2.0)}}});
  }
  for (auto _ : state) {
    auto result = trace::aggregate_events(events, 300, 0, 90000, "bench",
                                          {"cpu", "memory"});
    benchmark::DoNotOptimize(result.series.values.data());
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(n_events));
}
BENCHMARK(BM_AggregateEvents)->Arg(1000)->Arg(10000)->Arg(100000);

void BM_MakeWindows(benchmark::State& state) {
  const auto series = synth::generate_trace(
      [] {
        synth::SynthSpec spec;
        spec.length = 8352;
        spec.resources = 2;
        spec.seed = 3;
        return spec;
      }(),
      "bench");
  const auto scaler = data::MinMaxScaler::fit(series);
  const auto scaled = data::scale(series, scaler);
  for (auto _ : state) {
    auto windows = data::make_windows(scaled);
    benchmark::DoNotOptimize(windows.data());
  }
}
BENCHMARK(BM_MakeWindows);

const data::SplitBundle& forward_bundle() {
  static const data::SplitBundle bundle = [] {
    synth::SynthSpec spec;
    spec.length = 2000;
    spec.resources = 1;
    spec.seed = 5;
    const auto series = synth::generate_trace(spec, "bench");
    return data::split(series, data::ResourceSelector::univariate("cpu"));
  }();
  return bundle;
}

void BM_ForwardPass(benchmark::State& state) {
  const auto& bundle = forward_bundle();
  models::ModelConfig config;
  config.kind = models::ModelKind::kDistributional;
  config.conv_kernels = {{static_cast<int>(state.range(0)), 3}};
  config.lstm_units = static_cast<int>(state.range(1));
  config.dense_stack = {static_cast<int>(state.range(1))};
  config.output_resources = 1;
  auto net = models::build_model(config);
  rng::PortableRng gen(1);
  net->init(gen);

  const Eigen::Index batch = 256;
  nn::Seq input(static_cast<std::size_t>(bundle.input_len));
  for (auto& step : input) step = nn::Mat::Constant(batch, 1, 0.5);
  for (auto _ : state) {
    auto raw = net->forward(input);
    benchmark::DoNotOptimize(raw.data());
  }
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_ForwardPass)->Args({16, 16})->Args({32, 64});

void BM_QosMetrics(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  rng::PortableRng gen(2);
  std::vector<double> ub(n), act(n);
  for (std::size_t i = 0; i < n; ++i) {
    ub[i] = gen.uniform(0.0, 1.0);
    act[i] = gen.uniform(0.0, 1.0);
  }
  for (auto _ : state) {
    auto report = eval::qos_metrics(ub, act, 95.0);
    benchmark::DoNotOptimize(report.tpr);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_QosMetrics)->Arg(1600)->Arg(100000);

void BM_CalibrationCurve(benchmark::State& state) {
  const std::size_t n = 1600;
  rng::PortableRng gen(4);
  std::vector<double> mean(n), sd(n), act(n);
  for (std::size_t i = 0; i < n; ++i) {
    mean[i] = gen.uniform(0.3, 0.7);
    sd[i] = gen.uniform(0.02, 0.1);
    act[i] = gen.normal(mean[i], 0.06);
  }
  for (auto _ : state) {
    auto curve = eval::calibration_curve(mean, sd, act);
    benchmark::DoNotOptimize(curve.curve_mae);
  }
}
BENCHMARK(BM_CalibrationCurve);

}  // namespace
