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
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

#include "cloudcast/csv.hpp"
#include "cloudcast/errors.hpp"
#include "cloudcast/report.hpp"
#include "test_util.hpp"

using namespace cloudcast;
using nlohmann::json;

namespace {

json metric_stub(const std::string& scenario, const std::string& model,
                 const std::string& cluster, int seed, double mse,
                 const std::string& hash = "h1") {
  json j;
  j["scenario"] = scenario;
  j["model"] = model;
  j["mode"] = "univariate:cpu";
  j["cluster"] = cluster;
  j["seed"] = seed;
  j["config_hash"] = hash;
  j["point"]["cpu"] = {{"mse", mse}, {"mae", mse / 2.0}};
  j["qos"]["95"]["cpu"] = {
      {"sr", 94.0}, {"op", 10.0}, {"up", 1.0}, {"tpr", 100.0}, {"n", 50}};
  j["calibration"]["cpu"] = {{"levels", std::vector<double>{90.0, 95.0}},
                             {"achieved_sr", std::vector<double>{91.0, 96.0}},
                             {"curve_mse", mse * 10},
                             {"curve_mae", mse * 5}};
  j["tpr_sr"]["cpu"] = {{"levels", std::vector<double>{90.0, 95.0}},
                        {"tpr", std::vector<double>{100.0, 110.0}},
                        {"sr", std::vector<double>{91.0, 96.0}}};
  return j;
}

std::filesystem::path write_metric(const std::filesystem::path& dir,
                                   const std::string& name, const json& j) {
  const auto path = dir / name;
  std::ofstream out(path);
  out << j.dump(2);
  return path;
}

std::map<std::string, std::vector<std::string>> read_csv_rows(
    const std::filesystem::path& path, std::size_t key_cols) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);  // header
  std::map<std::string, std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = csv::split_line(line);
    std::string key;
    for (std::size_t i = 0; i < key_cols; ++i) key += fields[i] + "|";
    rows[key] = fields;
  }
  return rows;
}

}  // namespace

TEST_CASE("a single metric file passes through unchanged") {
  testutil::TempDir tmp("rep1");
  const auto f =
      write_metric(tmp.path(), "m1.json", metric_stub("all", "lstmd", "c1", 1, 0.004));
  const auto out = tmp.path() / "out";
  const auto outcome = eval::aggregate_report({f}, out);
  CHECK(outcome.warnings.empty());

  const auto rows = read_csv_rows(out / "summary_point.csv", 4);
  REQUIRE(rows.size() == 1);
  const auto& fields = rows.begin()->second;
  CHECK(csv::parse_double(fields[4]) == doctest::Approx(0.004));
  CHECK(csv::parse_double(fields[5]) == doctest::Approx(0.002));
  CHECK(fields[6] == "1");  // one cell
  CHECK(fields[7] == "1");  // only model: flagged best
}

TEST_CASE("seeds and clusters collapse to the group mean") {
  testutil::TempDir tmp("rep2");
  std::vector<std::filesystem::path> files;
  // two seeds with point mse 0.8 and 1.2 -> mean 1.0
  files.push_back(write_metric(tmp.path(), "s1.json",
                               metric_stub("all", "lstmd", "c1", 1, 0.8)));
  files.push_back(write_metric(tmp.path(), "s2.json",
                               metric_stub("all", "lstmd", "c1", 2, 1.2)));
  // a second model in the same group, clearly better
  files.push_back(write_metric(tmp.path(), "h1.json",
                               metric_stub("all", "hbnn", "c1", 1, 0.1)));
  const auto out = tmp.path() / "out";
  const auto outcome = eval::aggregate_report(files, out);
  CHECK(outcome.warnings.empty());

  const auto rows = read_csv_rows(out / "summary_point.csv", 4);
  REQUIRE(rows.size() == 2);
  const auto& lstmd = rows.at("all|lstmd|univariate:cpu|cpu|");
  CHECK(csv::parse_double(lstmd[4]) == doctest::Approx(1.0));
  CHECK(lstmd[6] == "2");
  CHECK(lstmd[7] == "0");
  const auto& hbnn = rows.at("all|hbnn|univariate:cpu|cpu|");
  CHECK(hbnn[7] == "1");  // best of the group

  CHECK(std::filesystem::exists(out / "summary_qos.csv"));
  CHECK(std::filesystem::exists(out / "summary_calibration.csv"));
  CHECK(std::filesystem::exists(out / "summary.txt"));
  CHECK(std::filesystem::exists(out /
                                "tpr_sr_all_univariate_cpu_cpu.svg"));
  CHECK(std::filesystem::exists(out /
                                "calibration_all_univariate_cpu_cpu.svg"));
}

TEST_CASE("missing files are warnings, zero inputs an error") {
  testutil::TempDir tmp("rep3");
  const auto good =
      write_metric(tmp.path(), "ok.json", metric_stub("all", "lstmd", "c", 1, 0.5));
  const auto outcome = eval::aggregate_report(
      {good, tmp.path() / "absent.json"}, tmp.path() / "out");
  REQUIRE(outcome.warnings.size() == 1);
  CHECK(outcome.warnings[0].find("absent.json") != std::string::npos);

  CHECK_THROWS_AS(eval::aggregate_report({tmp.path() / "absent.json"},
                                         tmp.path() / "out2"),
                  ArtifactError);
}

TEST_CASE("mixed config hashes abort unless overridden") {
  testutil::TempDir tmp("rep4");
  const auto a = write_metric(tmp.path(), "a.json",
                              metric_stub("all", "lstmd", "c1", 1, 0.5, "h1"));
  const auto b = write_metric(tmp.path(), "b.json",
                              metric_stub("all", "hbnn", "c1", 1, 0.5, "h2"));
  CHECK_THROWS_AS(eval::aggregate_report({a, b}, tmp.path() / "out"),
                  ArtifactError);
  eval::ReportOptions allow;
  allow.allow_mixed_hashes = true;
  CHECK_NOTHROW(eval::aggregate_report({a, b}, tmp.path() / "out", allow));
}

TEST_CASE("svg chart writer emits polylines for every series") {
  testutil::TempDir tmp("svg");
  eval::ChartSeries s1{"one", {0.0, 1.0, 2.0}, {0.0, 1.0, 4.0}};
  eval::ChartSeries s2{"two", {0.0, 1.0, 2.0}, {4.0, 1.0, 0.0}};
  const auto path = tmp.path() / "chart.svg";
  eval::write_line_chart_svg(path, "title", "x", "y", {s1, s2});
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  const auto svg = buf.str();
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("title") != std::string::npos);
  CHECK(std::count(svg.begin(), svg.end(), '\n') > 5);
  std::size_t polylines = 0, pos = 0;
  while ((pos = svg.find("<polyline", pos)) != std::string::npos) {
    ++polylines;
    pos += 9;
  }
  CHECK(polylines == 2);
}
