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

#ifndef CLOUDCAST_SCALER_HPP_
#define CLOUDCAST_SCALER_HPP_

#include <Eigen/Core>
#include <filesystem>
#include <string>
#include <vector>

#include "cloudcast/trace.hpp"

namespace cloudcast::data {

/// Per-resource MinMax scaler, fitted on the training portion only so the
/// test region cannot leak into the scale. Values outside the fitted range
/// map outside [0, 1]; that is intentional.
class MinMaxScaler {
 public:
  MinMaxScaler() = default;
  MinMaxScaler(std::vector<std::string> resources, Eigen::VectorXd min,
               Eigen::VectorXd max);

  /// Fits on the first floor(train_fraction * T) rows.
  /// Throws DegenerateScaleError when a resource is constant there.
  static MinMaxScaler fit(const trace::TraceSeries& series,
                          double train_fraction = 0.8);

  Eigen::MatrixXd transform(const Eigen::MatrixXd& values) const;
  Eigen::MatrixXd inverse(const Eigen::MatrixXd& scaled) const;

  const std::vector<std::string>& resources() const { return resources_; }
  const Eigen::VectorXd& min() const { return min_; }
  const Eigen::VectorXd& max() const { return max_; }
  bool empty() const { return min_.size() == 0; }

  std::string to_json() const;
  static MinMaxScaler from_json(const std::string& text);
  void save(const std::filesystem::path& path) const;
  static MinMaxScaler load(const std::filesystem::path& path);

 private:
  std::vector<std::string> resources_;
  Eigen::VectorXd min_, max_;
};

/// Returns a copy of the series with scaled values.
trace::TraceSeries scale(const trace::TraceSeries& series,
                         const MinMaxScaler& scaler);

/// Maps scaled values back to raw units.
Eigen::MatrixXd inverse_scale(const Eigen::MatrixXd& scaled,
                              const MinMaxScaler& scaler);

}  // namespace cloudcast::data

#endif  // CLOUDCAST_SCALER_HPP_
