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

#include "cloudcast/trace_io.hpp"

#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <sstream>

#include "cloudcast/csv.hpp"
#include "cloudcast/errors.hpp"

namespace cloudcast::trace {

EventSchema EventSchema::google_cluster() {
  EventSchema s;
  s.usage_columns = {{"average_usage_cpus", "cpu"},
                     {"average_usage_memory", "memory"}};
  return s;
}

EventSchema EventSchema::alibaba_gpu() {
  EventSchema s;
  s.usage_columns = {{"gpu_wrk_util", "gpu"}, {"gpu_mem", "gpu_memory"}};
  return s;
}

EventFile read_events_csv(std::istream& in, const EventSchema& schema) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty event file");
  const auto header = csv::split_line(line);

  int start_col = -1;
  int end_col = -1;
  std::vector<std::pair<int, std::string>> usage_cols;  // column -> resource
  for (std::size_t i = 0; i < header.size(); ++i) {
    const auto& name = header[i];
    if (name == schema.start_column) {
      start_col = static_cast<int>(i);
    } else if (name == schema.end_column) {
      end_col = static_cast<int>(i);
    } else if (schema.usage_columns.empty()) {
      usage_cols.emplace_back(static_cast<int>(i), name);
    } else if (auto it = schema.usage_columns.find(name);
               it != schema.usage_columns.end()) {
      usage_cols.emplace_back(static_cast<int>(i), it->second);
    }
  }
  if (start_col < 0 || end_col < 0 || usage_cols.empty()) {
    throw DataError("event file header lacks required columns");
  }

  EventFile out;
  for (const auto& [col, res] : usage_cols) out.resources.push_back(res);

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = csv::split_line(line);
    if (fields.size() != header.size()) {
      throw DataError("event row has " + std::to_string(fields.size()) +
                      " fields, header has " + std::to_string(header.size()));
    }
    UsageEvent e;
    e.start_time = csv::parse_int(fields[static_cast<std::size_t>(start_col)]);
    e.end_time = csv::parse_int(fields[static_cast<std::size_t>(end_col)]);
    for (const auto& [col, res] : usage_cols) {
      const auto& field = fields[static_cast<std::size_t>(col)];
      // Keep NaN markers as NaN so the aggregator can reject and count them.
      double v;
      if (field.empty() || field == "nan" || field == "NaN") {
        v = std::numeric_limits<double>::quiet_NaN();
      } else {
        v = csv::parse_double(field);
      }
      e.usage[res] = v;
    }
    out.events.push_back(std::move(e));
  }
  return out;
}

EventFile read_events_csv(const std::filesystem::path& path,
                          const EventSchema& schema) {
  std::ifstream in(path);
  if (!in) throw ArtifactError("cannot open event file: " + path.string());
  return read_events_csv(in, schema);
}

void write_trace_csv(std::ostream& out, const TraceSeries& series) {
  out << "timestamp";
  for (const auto& r : series.resources) out << ',' << r;
  out << '\n';
  for (Eigen::Index i = 0; i < series.size(); ++i) {
    out << series.timestamps[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < series.values.cols(); ++j) {
      out << ',' << csv::format_double(series.values(i, j));
    }
    out << '\n';
  }
}

void write_trace_csv(const std::filesystem::path& path,
                     const TraceSeries& series) {
  std::ofstream out(path);
  if (!out) throw ArtifactError("cannot write trace: " + path.string());
  write_trace_csv(out, series);
}

TraceSeries read_trace_csv(std::istream& in, std::string cluster_id,
                           int window_seconds) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty trace file");
  auto header = csv::split_line(line);
  if (header.size() < 2 || header[0] != "timestamp") {
    throw DataError("trace file must start with 'timestamp,<resource>...'");
  }

  TraceSeries series;
  series.cluster_id = std::move(cluster_id);
  series.window_seconds = window_seconds;
  series.resources.assign(header.begin() + 1, header.end());

  std::vector<std::int64_t> ts;
  std::vector<double> flat;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = csv::split_line(line);
    if (fields.size() != header.size()) {
      throw DataError("trace row width mismatch");
    }
    ts.push_back(csv::parse_int(fields[0]));
    for (std::size_t j = 1; j < fields.size(); ++j) {
      flat.push_back(csv::parse_double(fields[j]));
    }
  }
  const auto n = static_cast<Eigen::Index>(ts.size());
  const auto r = static_cast<Eigen::Index>(series.resources.size());
  series.timestamps = std::move(ts);
  series.values.resize(n, r);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < r; ++j) {
      series.values(i, j) = flat[static_cast<std::size_t>(i * r + j)];
    }
  }
  return series;
}

TraceSeries read_trace_csv(const std::filesystem::path& path,
                           std::string cluster_id, int window_seconds) {
  std::ifstream in(path);
  if (!in) throw ArtifactError("cannot open trace file: " + path.string());
  return read_trace_csv(in, std::move(cluster_id), window_seconds);
}

void write_gap_report_json(const std::filesystem::path& path,
                           const GapReport& report) {
  nlohmann::json j;
  j["cluster_id"] = report.cluster_id;
  j["interpolated_indices"] = report.interpolated_indices;
  j["rejected_records"] = report.rejected_records;
  std::ofstream out(path);
  if (!out) throw ArtifactError("cannot write gap report: " + path.string());
  out << j.dump(2) << '\n';
}

GapReport read_gap_report_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ArtifactError("cannot open gap report: " + path.string());
  nlohmann::json j;
  in >> j;
  GapReport report;
  report.cluster_id = j.at("cluster_id").get<std::string>();
  report.interpolated_indices =
      j.at("interpolated_indices").get<std::vector<std::int64_t>>();
  report.rejected_records = j.at("rejected_records").get<std::int64_t>();
  return report;
}

}  // namespace cloudcast::trace
