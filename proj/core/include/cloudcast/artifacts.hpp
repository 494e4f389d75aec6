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

#ifndef CLOUDCAST_ARTIFACTS_HPP_
#define CLOUDCAST_ARTIFACTS_HPP_

#include <filesystem>
#include <string>

namespace cloudcast::artifacts {

// Run-directory layout. The run root is the only persistence layer;
// every command reads and writes deterministic paths below it.

using std::filesystem::path;

inline path traces_dir(const path& root) { return root / "traces"; }
inline path gaps_dir(const path& root) { return root / "gaps"; }
inline path bundles_dir(const path& root) { return root / "bundles"; }
inline path runs_dir(const path& root) { return root / "runs"; }
inline path metrics_dir(const path& root) { return root / "metrics"; }
inline path reports_dir(const path& root) { return root / "reports"; }
inline path bench_dir(const path& root) { return root / "bench"; }

/// SHA-256 of the canonical JSON a command ran with; embedded in every
/// artifact directory so reports can refuse to mix incompatible runs.
std::string config_hash(const std::string& canonical_json);

enum class StepState {
  kMissing,    // never completed here
  kComplete,   // finished with the same config hash
  kMismatch,   // finished with a different config hash
};

/// Looks for `<dir>/manifest.json` and compares command + hash.
StepState step_state(const path& dir, const std::string& command,
                     const std::string& hash);

/// Marks the step complete (written after all outputs).
void mark_complete(const path& dir, const std::string& command,
                   const std::string& hash);

}  // namespace cloudcast::artifacts

#endif  // CLOUDCAST_ARTIFACTS_HPP_
