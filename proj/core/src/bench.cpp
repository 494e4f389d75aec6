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

#include "cloudcast/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>

#include "cloudcast/csv.hpp"
#include "cloudcast/errors.hpp"

namespace cloudcast::bench {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

RuntimeCell finalize_cell(std::string label, std::vector<double> runs) {
  RuntimeCell cell;
  cell.label = std::move(label);
  cell.repetitions = static_cast<int>(runs.size());
  double mean = 0.0;
  for (const double r : runs) mean += r;
  mean /= static_cast<double>(runs.size());
  double var = 0.0;
  for (const double r : runs) var += (r - mean) * (r - mean);
  cell.mean_s = mean;
  cell.std_s = runs.size() > 1
                   ? std::sqrt(var / static_cast<double>(runs.size() - 1))
                   : 0.0;
  cell.runs_s = std::move(runs);
  return cell;
}

data::SplitBundle leading_fraction_bundle(const data::SplitBundle& bundle,
                                          double fraction) {
  const auto n = static_cast<std::size_t>(
      std::floor(fraction * static_cast<double>(bundle.train.size())));
  if (n < 1) {
    throw DataError("training fraction yields no samples");
  }
  data::SplitBundle sub = bundle;
  sub.train.assign(bundle.train.begin(),
                   bundle.train.begin() + static_cast<std::ptrdiff_t>(n));
  return sub;
}

}  // namespace

std::vector<RuntimeCell> bench_training(const models::ModelConfig& config,
                                        const data::SplitBundle& bundle,
                                        std::span<const double> fractions,
                                        const models::TrainOptions& opts,
                                        int repetitions) {
  if (repetitions < 1) throw ParameterError("repetitions must be >= 1");
  std::vector<RuntimeCell> cells;
  for (const double fraction : fractions) {
    if (!(fraction > 0.0 && fraction <= 1.0)) {
      throw ParameterError("training fractions must be in (0, 1]");
    }
    const auto sub = leading_fraction_bundle(bundle, fraction);
    std::vector<double> runs;
    runs.reserve(static_cast<std::size_t>(repetitions));
    for (int rep = 0; rep < repetitions; ++rep) {
      const auto start = Clock::now();
      (void)models::train(config, sub, opts);
      runs.push_back(seconds_since(start));
    }
    char label[32];
    std::snprintf(label, sizeof(label), "train_%d",
                  static_cast<int>(std::lround(fraction * 100)));
    cells.push_back(finalize_cell(label, std::move(runs)));
  }
  return cells;
}

std::vector<RuntimeCell> bench_finetune(const models::TrainedModel& model,
                                        const data::SplitBundle& bundle,
                                        std::span<const int> step_counts,
                                        const scenarios::FineTuneOptions& opts,
                                        int repetitions) {
  if (repetitions < 1) throw ParameterError("repetitions must be >= 1");
  const std::string hash_before = model.weights_hash();

  std::vector<RuntimeCell> cells;
  for (const int steps : step_counts) {
    if (steps < 1) throw ParameterError("step counts must be >= 1");
    if (static_cast<std::size_t>(steps) > bundle.train.size()) {
      throw DataError("step count exceeds available training samples");
    }
    // Newest `steps` samples only, as if that much fresh data had arrived.
    data::SplitBundle sub = bundle;
    sub.train.assign(bundle.train.end() - steps, bundle.train.end());

    std::vector<double> runs;
    runs.reserve(static_cast<std::size_t>(repetitions));
    for (int rep = 0; rep < repetitions; ++rep) {
      const auto start = Clock::now();
      (void)scenarios::fine_tune(model, sub, opts);
      runs.push_back(seconds_since(start));
    }
    cells.push_back(finalize_cell("finetune_" + std::to_string(steps),
                                  std::move(runs)));
  }

  if (model.weights_hash() != hash_before) {
    throw std::logic_error("benchmark mutated the model under test");
  }
  return cells;
}

RuntimeCell bench_inference(const models::TrainedModel& model,
                            const data::SplitBundle& bundle, int samples) {
  if (samples < 1) throw ParameterError("samples must be >= 1");
  if (bundle.test.empty()) throw DataError("bundle has no test samples");

  const std::string hash_before = model.weights_hash();
  const std::vector<data::SampleRef> one = {bundle.test.front()};
  (void)models::predict_distribution(model, bundle, one);  // warm-up

  std::vector<double> runs;
  runs.reserve(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) {
    const std::vector<data::SampleRef> ref = {
        bundle.test[static_cast<std::size_t>(i) % bundle.test.size()]};
    const auto start = Clock::now();
    (void)models::predict_distribution(model, bundle, ref);
    runs.push_back(seconds_since(start));
  }
  if (model.weights_hash() != hash_before) {
    throw std::logic_error("benchmark mutated the model under test");
  }

  std::vector<double> sorted = runs;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = sorted.size() / 2;
  const double median = sorted.size() % 2 == 1
                            ? sorted[mid]
                            : 0.5 * (sorted[mid - 1] + sorted[mid]);
  RuntimeCell cell = finalize_cell("inference_1", std::move(runs));
  cell.mean_s = median;  // latency cell reports the median
  return cell;
}

void write_report_csv(const std::filesystem::path& path,
                      const RuntimeReport& report) {
  std::ofstream out(path);
  if (!out) throw ArtifactError("cannot write bench report: " + path.string());
  out << "model,kind,label,seconds,std_s,repetitions\n";
  auto row = [&](const char* kind, const RuntimeCell& cell) {
    out << report.model_label << ',' << kind << ',' << cell.label << ','
        << csv::format_double(cell.mean_s) << ','
        << csv::format_double(cell.std_s) << ',' << cell.repetitions << '\n';
  };
  for (const auto& cell : report.training) row("training", cell);
  for (const auto& cell : report.finetune) row("finetune", cell);
  row("inference", report.inference);
}

void write_raw_log(const std::filesystem::path& path,
                   const RuntimeReport& report) {
  std::ofstream out(path);
  if (!out) throw ArtifactError("cannot write bench log: " + path.string());
  auto line = [&](const char* kind, const RuntimeCell& cell) {
    nlohmann::json j;
    j["model"] = report.model_label;
    j["kind"] = kind;
    j["label"] = cell.label;
    j["runs_s"] = cell.runs_s;
    j["mean_s"] = cell.mean_s;
    j["std_s"] = cell.std_s;
    out << j.dump() << '\n';
  };
  for (const auto& cell : report.training) line("training", cell);
  for (const auto& cell : report.finetune) line("finetune", cell);
  line("inference", report.inference);
}

RuntimeReport read_raw_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ArtifactError("cannot open bench log: " + path.string());
  RuntimeReport report;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    RuntimeCell cell;
    cell.label = j.at("label").get<std::string>();
    cell.runs_s = j.at("runs_s").get<std::vector<double>>();
    cell.mean_s = j.at("mean_s").get<double>();
    cell.std_s = j.at("std_s").get<double>();
    cell.repetitions = static_cast<int>(cell.runs_s.size());
    report.model_label = j.at("model").get<std::string>();
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "training") {
      report.training.push_back(std::move(cell));
    } else if (kind == "finetune") {
      report.finetune.push_back(std::move(cell));
    } else {
      report.inference = std::move(cell);
    }
  }
  return report;
}

ExclusiveLock::ExclusiveLock(std::filesystem::path path)
    : path_(std::move(path)) {
  std::error_code ec;
  std::filesystem::create_directories(path_.parent_path(), ec);
  if (std::filesystem::exists(path_)) {
    throw ArtifactError("benchmark lock already held: " + path_.string());
  }
  std::ofstream out(path_);
  if (!out) throw ArtifactError("cannot create lock file: " + path_.string());
  out << "locked\n";
}

ExclusiveLock::~ExclusiveLock() {
  std::error_code ec;
  std::filesystem::remove(path_, ec);
}

}  // namespace cloudcast::bench
