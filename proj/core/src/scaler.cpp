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

#include "cloudcast/scaler.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>

#include "cloudcast/errors.hpp"

namespace cloudcast::data {

MinMaxScaler::MinMaxScaler(std::vector<std::string> resources,
                           Eigen::VectorXd min, Eigen::VectorXd max)
    : resources_(std::move(resources)),
      min_(std::move(min)),
      max_(std::move(max)) {
  if (min_.size() != max_.size() ||
      static_cast<std::size_t>(min_.size()) != resources_.size()) {
    throw ParameterError("scaler dimensions mismatch");
  }
  for (Eigen::Index i = 0; i < min_.size(); ++i) {
    if (!(max_(i) > min_(i))) {
      throw DegenerateScaleError("max must exceed min for resource '" +
                                 resources_[static_cast<std::size_t>(i)] + "'");
    }
  }
}

MinMaxScaler MinMaxScaler::fit(const trace::TraceSeries& series,
                               double train_fraction) {
  if (series.size() == 0) throw DataError("cannot fit scaler on empty series");
  if (train_fraction <= 0.0 || train_fraction > 1.0) {
    throw ParameterError("train_fraction must be in (0, 1]");
  }
  const auto rows = static_cast<Eigen::Index>(
      std::floor(train_fraction * static_cast<double>(series.size())));
  if (rows < 1) throw DataError("training portion is empty");

  const auto block = series.values.topRows(rows);
  Eigen::VectorXd lo = block.colwise().minCoeff();
  Eigen::VectorXd hi = block.colwise().maxCoeff();
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    if (!(hi(i) > lo(i))) {
      throw DegenerateScaleError(
          "training portion is constant for resource '" +
          series.resources[static_cast<std::size_t>(i)] + "'");
    }
  }
  return MinMaxScaler(series.resources, std::move(lo), std::move(hi));
}

Eigen::MatrixXd MinMaxScaler::transform(const Eigen::MatrixXd& values) const {
  if (values.cols() != min_.size()) {
    throw ParameterError("scaler/value column mismatch");
  }
  Eigen::MatrixXd out = values;
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    out.col(c) = (out.col(c).array() - min_(c)) / (max_(c) - min_(c));
  }
  return out;
}

Eigen::MatrixXd MinMaxScaler::inverse(const Eigen::MatrixXd& scaled) const {
  if (scaled.cols() != min_.size()) {
    throw ParameterError("scaler/value column mismatch");
  }
  Eigen::MatrixXd out = scaled;
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    out.col(c) = out.col(c).array() * (max_(c) - min_(c)) + min_(c);
  }
  return out;
}

std::string MinMaxScaler::to_json() const {
  nlohmann::json j;
  for (std::size_t i = 0; i < resources_.size(); ++i) {
    j["resources"].push_back(resources_[i]);
    j["min"].push_back(min_(static_cast<Eigen::Index>(i)));
    j["max"].push_back(max_(static_cast<Eigen::Index>(i)));
  }
  return j.dump(2);
}

MinMaxScaler MinMaxScaler::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  const auto resources = j.at("resources").get<std::vector<std::string>>();
  const auto mins = j.at("min").get<std::vector<double>>();
  const auto maxs = j.at("max").get<std::vector<double>>();
  Eigen::VectorXd lo = Eigen::Map<const Eigen::VectorXd>(
      mins.data(), static_cast<Eigen::Index>(mins.size()));
  Eigen::VectorXd hi = Eigen::Map<const Eigen::VectorXd>(
      maxs.data(), static_cast<Eigen::Index>(maxs.size()));
  return MinMaxScaler(resources, std::move(lo), std::move(hi));
}

void MinMaxScaler::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw ArtifactError("cannot write scaler: " + path.string());
  out << to_json() << '\n';
}

MinMaxScaler MinMaxScaler::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ArtifactError("cannot open scaler: " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return from_json(text);
}

trace::TraceSeries scale(const trace::TraceSeries& series,
                         const MinMaxScaler& scaler) {
  trace::TraceSeries out = series;
  out.values = scaler.transform(series.values);
  return out;
}

Eigen::MatrixXd inverse_scale(const Eigen::MatrixXd& scaled,
                              const MinMaxScaler& scaler) {
  return scaler.inverse(scaled);
}

}  // namespace cloudcast::data
