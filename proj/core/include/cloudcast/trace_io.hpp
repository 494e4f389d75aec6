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

#ifndef CLOUDCAST_TRACE_IO_HPP_
#define CLOUDCAST_TRACE_IO_HPP_

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "cloudcast/trace.hpp"

namespace cloudcast::trace {

/// Column mapping for event files. The canonical layout is
/// `start_time,end_time,<resource>...`; provider exports with different
/// column names plug in through `usage_columns` (file column -> resource).
struct EventSchema {
  std::string start_column = "start_time";
  std::string end_column = "end_time";
  // Empty: every non-time column is a resource under its own name.
  std::map<std::string, std::string> usage_columns;

  static EventSchema canonical() { return {}; }
  static EventSchema google_cluster();   // average_usage_cpus/_memory
  static EventSchema alibaba_gpu();      // gpu_wrk_util / gpu_mem
};

struct EventFile {
  std::vector<UsageEvent> events;
  std::vector<std::string> resources;  // in file column order, after mapping
};

EventFile read_events_csv(std::istream& in,
                          const EventSchema& schema = EventSchema::canonical());
EventFile read_events_csv(const std::filesystem::path& path,
                          const EventSchema& schema = EventSchema::canonical());

/// Trace CSV: header `timestamp,<resource>...`, one row per window.
void write_trace_csv(std::ostream& out, const TraceSeries& series);
void write_trace_csv(const std::filesystem::path& path,
                     const TraceSeries& series);
TraceSeries read_trace_csv(std::istream& in, std::string cluster_id,
                           int window_seconds = 300);
TraceSeries read_trace_csv(const std::filesystem::path& path,
                           std::string cluster_id, int window_seconds = 300);

/// `{cluster_id, interpolated_indices:[...], rejected_records:int}`
void write_gap_report_json(const std::filesystem::path& path,
                           const GapReport& report);
GapReport read_gap_report_json(const std::filesystem::path& path);

}  // namespace cloudcast::trace

#endif  // CLOUDCAST_TRACE_IO_HPP_
