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

#include "cloudcast/trace.hpp"

#include <algorithm>
#include <cmath>

#include "cloudcast/errors.hpp"

namespace cloudcast::trace {

Eigen::Index TraceSeries::resource_index(const std::string& name) const {
  for (std::size_t i = 0; i < resources.size(); ++i) {
    if (resources[i] == name) return static_cast<Eigen::Index>(i);
  }
  throw ParameterError("unknown resource '" + name + "' in cluster '" +
                       cluster_id + "'");
}

namespace {

bool event_is_valid(const UsageEvent& e) {
  if (e.end_time <= e.start_time) return false;
  for (const auto& [name, value] : e.usage) {
    if (!std::isfinite(value) || value < 0.0) return false;
  }
  return true;
}

}  // namespace

AggregateResult aggregate_events(const std::vector<UsageEvent>& events,
                                 int window_seconds, std::int64_t t0,
                                 std::int64_t t1, std::string cluster_id,
                                 std::vector<std::string> resources) {
  if (window_seconds <= 0) throw ParameterError("window_seconds must be > 0");
  if (t1 <= t0) throw ParameterError("t1 must be > t0");
  if ((t1 - t0) % window_seconds != 0) {
    throw ParameterError("(t1 - t0) must be divisible by window_seconds");
  }
  if (resources.empty()) throw ParameterError("no resources requested");
  if (events.empty()) throw DataError("no data: empty event list");

  const std::int64_t n_windows = (t1 - t0) / window_seconds;
  const auto n_res = static_cast<Eigen::Index>(resources.size());
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n_windows, n_res);
  std::vector<bool> covered(static_cast<std::size_t>(n_windows), false);

  GapReport gaps;
  gaps.cluster_id = cluster_id;

  for (const auto& event : events) {
    if (!event_is_valid(event)) {
      ++gaps.rejected_records;
      continue;
    }
    const std::int64_t lo = std::max(event.start_time, t0);
    const std::int64_t hi = std::min(event.end_time, t1);
    if (hi <= lo) continue;  // outside the requested range
    const std::int64_t first = (lo - t0) / window_seconds;
    const std::int64_t last = (hi - t0 - 1) / window_seconds;
    for (std::int64_t w = first; w <= last; ++w) {
      const std::int64_t w_start = t0 + w * window_seconds;
      const std::int64_t w_end = w_start + window_seconds;
      const auto overlap = static_cast<double>(std::min(hi, w_end) -
                                               std::max(lo, w_start));
      if (overlap <= 0.0) continue;
      const double weight = overlap / window_seconds;
      covered[static_cast<std::size_t>(w)] = true;
      for (Eigen::Index r = 0; r < n_res; ++r) {
        const auto it = event.usage.find(resources[static_cast<std::size_t>(r)]);
        if (it != event.usage.end()) acc(w, r) += it->second * weight;
      }
    }
  }

  std::int64_t first_covered = -1;
  std::int64_t last_covered = -1;
  for (std::int64_t w = 0; w < n_windows; ++w) {
    if (covered[static_cast<std::size_t>(w)]) {
      if (first_covered < 0) first_covered = w;
      last_covered = w;
    }
  }
  if (first_covered < 0) {
    throw DataError("no data: no event overlaps the requested range");
  }

  // Trim uncovered edges, interpolate interior gaps. Missing windows are
  // dropped from the raw aggregation, but downstream windowing needs a
  // contiguous grid, so interior drops are refilled linearly and reported.
  const std::int64_t n_out = last_covered - first_covered + 1;
  TraceSeries series;
  series.cluster_id = std::move(cluster_id);
  series.resources = std::move(resources);
  series.window_seconds = window_seconds;
  series.timestamps.resize(static_cast<std::size_t>(n_out));
  series.values.resize(n_out, n_res);

  for (std::int64_t i = 0; i < n_out; ++i) {
    const std::int64_t w = first_covered + i;
    series.timestamps[static_cast<std::size_t>(i)] = t0 + w * window_seconds;
    series.values.row(i) = acc.row(w);
    if (!covered[static_cast<std::size_t>(w)]) {
      gaps.interpolated_indices.push_back(i);
    }
  }

  // Linear interpolation between the nearest covered neighbours.
  std::size_t g = 0;
  while (g < gaps.interpolated_indices.size()) {
    std::size_t run_end = g;
    while (run_end + 1 < gaps.interpolated_indices.size() &&
           gaps.interpolated_indices[run_end + 1] ==
               gaps.interpolated_indices[run_end] + 1) {
      ++run_end;
    }
    const std::int64_t left = gaps.interpolated_indices[g] - 1;
    const std::int64_t right = gaps.interpolated_indices[run_end] + 1;
    const auto span = static_cast<double>(right - left);
    for (std::size_t k = g; k <= run_end; ++k) {
      const std::int64_t idx = gaps.interpolated_indices[k];
      const double frac = static_cast<double>(idx - left) / span;
      series.values.row(idx) = (1.0 - frac) * series.values.row(left) +
                               frac * series.values.row(right);
    }
    g = run_end + 1;
  }

  return {std::move(series), std::move(gaps)};
}

ValidationReport validate_trace(const TraceSeries& series) {
  ValidationReport report;
  const auto n = static_cast<std::int64_t>(series.timestamps.size());
  for (std::int64_t i = 0; i + 1 < n; ++i) {
    const auto delta = series.timestamps[static_cast<std::size_t>(i + 1)] -
                       series.timestamps[static_cast<std::size_t>(i)];
    if (delta != series.window_seconds) report.spacing_violations.push_back(i);
  }
  for (Eigen::Index i = 0; i < series.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < series.values.cols(); ++j) {
      const double v = series.values(i, j);
      if (!std::isfinite(v)) {
        ++report.non_finite_count;
      } else if (v < 0.0) {
        ++report.negative_count;
      }
    }
  }
  if (n > 0) {
    report.duration_days =
        static_cast<double>(series.timestamps[static_cast<std::size_t>(n - 1)] -
                            series.timestamps[0] + series.window_seconds) /
        86400.0;
  }
  return report;
}

}  // namespace cloudcast::trace
