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

#include "cloudcast/gaussian.hpp"

#include <boost/math/distributions/normal.hpp>
#include <cmath>

#include "cloudcast/errors.hpp"

namespace cloudcast::models {

namespace {
const boost::math::normal_distribution<double> kStdNormal(0.0, 1.0);
}  // namespace

double softplus(double x) {
  if (x > 30.0) return x;
  if (x < -30.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

double std_link(double raw) { return softplus(raw) + kStdFloor; }

double std_link_grad(double raw) {
  // d/dx softplus(x) = sigmoid(x)
  if (raw >= 0.0) {
    const double e = std::exp(-raw);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(raw);
  return e / (1.0 + e);
}

double gaussian_nll(const Eigen::VectorXd& target, const Eigen::VectorXd& mean,
                    const Eigen::VectorXd& std) {
  if (target.size() != mean.size() || target.size() != std.size()) {
    throw ParameterError("gaussian_nll: size mismatch");
  }
  double nll = 0.0;
  for (Eigen::Index i = 0; i < target.size(); ++i) {
    if (!(std(i) > 0.0)) throw ParameterError("gaussian_nll: std must be > 0");
    const double z = (target(i) - mean(i)) / std(i);
    nll += std::log(std(i)) + kHalfLog2Pi + 0.5 * z * z;
  }
  return nll;
}

NllGrad gaussian_nll_grad(const Eigen::VectorXd& target,
                          const Eigen::VectorXd& mean,
                          const Eigen::VectorXd& raw_std) {
  if (target.size() != mean.size() || target.size() != raw_std.size()) {
    throw ParameterError("gaussian_nll_grad: size mismatch");
  }
  NllGrad g;
  g.d_mean.resize(target.size());
  g.d_raw_std.resize(target.size());
  for (Eigen::Index i = 0; i < target.size(); ++i) {
    const double s = std_link(raw_std(i));
    const double r = target(i) - mean(i);
    g.d_mean(i) = -r / (s * s);
    const double d_std = 1.0 / s - (r * r) / (s * s * s);
    g.d_raw_std(i) = d_std * std_link_grad(raw_std(i));
  }
  return g;
}

double kl_gaussian_std_normal(double mu, double sigma) {
  if (!(sigma > 0.0)) throw ParameterError("kl: sigma must be > 0");
  return 0.5 * (sigma * sigma + mu * mu - 1.0) - std::log(sigma);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw ParameterError("quantile probability must be in (0, 1)");
  }
  return boost::math::quantile(kStdNormal, p);
}

double normal_cdf(double x) { return boost::math::cdf(kStdNormal, x); }

double interval_z(double confidence, IntervalSide side) {
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw ParameterError("confidence must be in (0, 1)");
  }
  const double p = side == IntervalSide::kTwoSided
                       ? 0.5 * (1.0 + confidence)
                       : confidence;
  return normal_quantile(p);
}

MomentMatched moment_match(const Eigen::VectorXd& means,
                           const Eigen::VectorXd& stds) {
  if (means.size() == 0 || means.size() != stds.size()) {
    throw ParameterError("moment_match: need matching non-empty samples");
  }
  const auto n = static_cast<double>(means.size());
  const double mean = means.mean();
  const double aleatory = stds.array().square().mean();
  const double epistemic = (means.array() - mean).square().sum() / n;
  return {mean, aleatory + epistemic};
}

}  // namespace cloudcast::models
