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

#ifndef CLOUDCAST_CSV_HPP_
#define CLOUDCAST_CSV_HPP_

#include <string>
#include <string_view>
#include <vector>

namespace cloudcast::csv {

// Minimal comma-separated helpers for the numeric files this project
// exchanges. No quoting: none of the formats carries embedded commas.

std::vector<std::string> split_line(std::string_view line);

/// Parses a double with '.' decimal separator; throws DataError on garbage.
double parse_double(std::string_view field);

std::int64_t parse_int(std::string_view field);

/// Formats a double with round-trip precision ("%.17g" semantics trimmed).
std::string format_double(double value);

std::string join(const std::vector<std::string>& fields);

}  // namespace cloudcast::csv

#endif  // CLOUDCAST_CSV_HPP_
