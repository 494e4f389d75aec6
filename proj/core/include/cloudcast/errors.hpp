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

#ifndef CLOUDCAST_ERRORS_HPP_
#define CLOUDCAST_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace cloudcast {

/// Invalid user-supplied parameter (bad config field, out-of-range value).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input data cannot be processed (empty event list, series too short, ...).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A scaler cannot be fitted because the training portion is constant.
class DegenerateScaleError : public DataError {
 public:
  using DataError::DataError;
};

/// A statistical test has no valid answer on the given input
/// (e.g. zero-variance loss differential).
class DegenerateTestError : public DataError {
 public:
  using DataError::DataError;
};

/// Training produced a non-finite loss.
class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A required artifact is missing or inconsistent on disk.
class ArtifactError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cloudcast

#endif  // CLOUDCAST_ERRORS_HPP_
