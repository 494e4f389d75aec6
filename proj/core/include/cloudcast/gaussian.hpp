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

#ifndef CLOUDCAST_GAUSSIAN_HPP_
#define CLOUDCAST_GAUSSIAN_HPP_

#include <Eigen/Core>

namespace cloudcast::models {

/// Floor added to every predicted standard deviation; keeps the
/// log-likelihood away from the sigma -> 0 singularity.
inline constexpr double kStdFloor = 1e-6;

inline constexpr double kHalfLog2Pi = 0.91893853320467274178;

double softplus(double x);

/// Maps a raw network output to a strictly positive std:
/// softplus(raw) + kStdFloor. Monotone in raw.
double std_link(double raw);

/// Derivative of std_link w.r.t. raw (the logistic sigmoid).
double std_link_grad(double raw);

/// Negative log-likelihood of `target` under independent Gaussians:
///   sum_r [ ln std_r + 0.5 ln(2 pi) + (target_r - mean_r)^2 / (2 std_r^2) ]
/// Throws ParameterError if any std is not strictly positive.
double gaussian_nll(const Eigen::VectorXd& target, const Eigen::VectorXd& mean,
                    const Eigen::VectorXd& std);

struct NllGrad {
  Eigen::VectorXd d_mean;
  Eigen::VectorXd d_raw_std;  // gradient through std_link
};

/// Analytic gradient of gaussian_nll w.r.t. mean and the raw (pre-link)
/// std parameters.
NllGrad gaussian_nll_grad(const Eigen::VectorXd& target,
                          const Eigen::VectorXd& mean,
                          const Eigen::VectorXd& raw_std);

/// KL( N(mu, sigma^2) || N(0, 1) ) for one factorized weight.
double kl_gaussian_std_normal(double mu, double sigma);

/// Standard normal quantile / CDF.
double normal_quantile(double p);
double normal_cdf(double x);

enum class IntervalSide {
  kTwoSided,  // z = Phi^-1((1 + c) / 2)
  kOneSided,  // z = Phi^-1(c)
};

/// z multiplier for an upper confidence bound at `confidence` in (0, 1).
double interval_z(double confidence, IntervalSide side = IntervalSide::kTwoSided);

/// Collapses equally weighted Gaussians into one Gaussian by moment
/// matching: mean of means; variance = mean aleatory variance plus the
/// population variance of the means.
struct MomentMatched {
  double mean;
  double variance;
};
MomentMatched moment_match(const Eigen::VectorXd& means,
                           const Eigen::VectorXd& stds);

}  // namespace cloudcast::models

#endif  // CLOUDCAST_GAUSSIAN_HPP_
