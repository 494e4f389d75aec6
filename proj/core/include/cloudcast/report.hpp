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

#ifndef CLOUDCAST_REPORT_HPP_
#define CLOUDCAST_REPORT_HPP_

#include <filesystem>
#include <string>
#include <vector>

namespace cloudcast::eval {

struct ReportOptions {
  bool allow_mixed_hashes = false;
};

struct ReportOutcome {
  std::vector<std::filesystem::path> written;
  std::vector<std::string> warnings;  // unreadable/missing metric files
};

/// Collapses per-(scenario, model, cluster, seed) metric files into
/// per-(scenario, model, mode) summary CSVs, a text table and SVG curves
/// (TPR-vs-SR and calibration). Works from persisted metrics only.
/// Missing files are listed as warnings; zero readable inputs is an error.
/// Mixed config hashes abort unless allow_mixed_hashes.
ReportOutcome aggregate_report(
    const std::vector<std::filesystem::path>& metric_files,
    const std::filesystem::path& out_dir, const ReportOptions& options = {});

/// Minimal SVG line chart (one polyline per series, legend, axes).
struct ChartSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

void write_line_chart_svg(const std::filesystem::path& path,
                          const std::string& title, const std::string& x_label,
                          const std::string& y_label,
                          const std::vector<ChartSeries>& series);

}  // namespace cloudcast::eval

#endif  // CLOUDCAST_REPORT_HPP_
