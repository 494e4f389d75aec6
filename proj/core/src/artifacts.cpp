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

#include "cloudcast/artifacts.hpp"

#include <fstream>
#include <nlohmann/json.hpp>

#include "cloudcast/errors.hpp"
#include "cloudcast/hash.hpp"

namespace cloudcast::artifacts {

std::string config_hash(const std::string& canonical_json) {
  return hash::sha256_hex(canonical_json);
}

StepState step_state(const path& dir, const std::string& command,
                     const std::string& hash) {
  const path manifest = dir / "manifest.json";
  std::ifstream in(manifest);
  if (!in) return StepState::kMissing;
  try {
    nlohmann::json j;
    in >> j;
    if (!j.value("complete", false)) return StepState::kMissing;
    if (j.value("command", "") == command && j.value("config_hash", "") == hash) {
      return StepState::kComplete;
    }
    return StepState::kMismatch;
  } catch (const std::exception&) {
    return StepState::kMissing;
  }
}

void mark_complete(const path& dir, const std::string& command,
                   const std::string& hash) {
  std::filesystem::create_directories(dir);
  nlohmann::json j;
  j["command"] = command;
  j["config_hash"] = hash;
  j["complete"] = true;
  std::ofstream out(dir / "manifest.json");
  if (!out) {
    throw ArtifactError("cannot write manifest in " + dir.string());
  }
  out << j.dump(2) << '\n';
}

}  // namespace cloudcast::artifacts
