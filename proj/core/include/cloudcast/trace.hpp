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

#ifndef CLOUDCAST_TRACE_HPP_
#define CLOUDCAST_TRACE_HPP_

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace cloudcast::trace {

/// One usage record: a task (or task aggregate) running over
/// [start_time, end_time) with average per-resource demand rates.
struct UsageEvent {
  std::int64_t start_time = 0;  // epoch seconds
  std::int64_t end_time = 0;    // epoch seconds, > start_time
  std::map<std::string, double> usage;  // resource name -> avg rate, >= 0
};

/// Cluster-level demand series on a uniform window grid.
struct TraceSeries {
  std::string cluster_id;
  std::vector<std::string> resources;   // column order of `values`
  int window_seconds = 300;
  std::vector<std::int64_t> timestamps;  // window start times, uniform spacing
  Eigen::MatrixXd values;                // timestamps.size() x resources.size()

  Eigen::Index size() const { return values.rows(); }
  Eigen::Index resource_count() const { return values.cols(); }
  Eigen::Index resource_index(const std::string& name) const;
};

/// Which windows had no covering events and were interpolated, plus how
/// many malformed input records were discarded.
struct GapReport {
  std::string cluster_id;
  std::vector<std::int64_t> interpolated_indices;  // indices into the series
  std::int64_t rejected_records = 0;
};

struct AggregateResult {
  TraceSeries series;
  GapReport gaps;
};

/// Buckets events into fixed windows over [t0, t1). Each event contributes
/// usage * overlap / window_seconds to every window it overlaps, summed
/// across events (cluster demand is a weighted sum, not a mean).
///
/// Windows covered by no event are linearly interpolated from their nearest
/// covered neighbours and listed in the gap report; uncovered windows at
/// either end of the range are trimmed. Records with non-finite or negative
/// usage, or with end_time <= start_time, are rejected and counted.
///
/// Throws ParameterError on a bad grid, DataError when no usable event
/// overlaps the range.
AggregateResult aggregate_events(const std::vector<UsageEvent>& events,
                                 int window_seconds, std::int64_t t0,
                                 std::int64_t t1, std::string cluster_id,
                                 std::vector<std::string> resources);

struct ValidationReport {
  std::vector<std::int64_t> spacing_violations;  // index i: gap after point i
  std::int64_t non_finite_count = 0;
  std::int64_t negative_count = 0;
  double duration_days = 0.0;

  bool ok() const {
    return spacing_violations.empty() && non_finite_count == 0 &&
           negative_count == 0;
  }
};

/// Report-only check of TraceSeries invariants.
ValidationReport validate_trace(const TraceSeries& series);

}  // namespace cloudcast::trace

#endif  // CLOUDCAST_TRACE_HPP_
