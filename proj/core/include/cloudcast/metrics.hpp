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

#ifndef CLOUDCAST_METRICS_HPP_
#define CLOUDCAST_METRICS_HPP_

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <vector>

#include "cloudcast/gaussian.hpp"

namespace cloudcast::eval {

struct PointMetrics {
  double mse = 0.0;
  double mae = 0.0;
};

/// MSE/MAE of the distribution mean (or point prediction) in scaled space.
PointMetrics point_metrics(std::span<const double> pred_mean,
                           std::span<const double> actual);

/// Interval-quality metrics at one confidence level. Boundary convention:
/// actual == bound counts as within the interval, everywhere.
struct QoSReport {
  double confidence = 0.0;  // percent
  double sr = 0.0;          // percent of demand within the bound
  double op = 0.0;          // total overprediction (within-bound slack)
  double up = 0.0;          // total underprediction (demand above bound)
  double tpr = 0.0;         // sum of all upper bounds
  std::int64_t n = 0;
};

QoSReport qos_metrics(std::span<const double> upper_bounds,
                      std::span<const double> actual,
                      double confidence_percent);

/// 90 -> 99.5 in steps of 0.5 (20 points), in percent.
std::vector<double> default_levels();

struct TprSrPoint {
  double level = 0.0;  // percent
  double tpr = 0.0;
  double sr = 0.0;
};

/// One (TPR, SR) pair per confidence level, bounds = mean + z(level)*std.
std::vector<TprSrPoint> tpr_sr_curve(
    std::span<const double> mean, std::span<const double> std,
    std::span<const double> actual,
    const std::vector<double>& levels = default_levels(),
    models::IntervalSide side = models::IntervalSide::kTwoSided);

struct CalibrationCurve {
  std::vector<double> levels;       // percent, strictly increasing
  std::vector<double> achieved_sr;  // percent
  double curve_mse = 0.0;           // vs y = x, percentage-point units
  double curve_mae = 0.0;
};

/// Coverage is one-sided (SR counts demand at or below the upper bound),
/// so the bound at level c defaults to the c-quantile of the forecast:
/// only then does a perfect model land on y = x.
CalibrationCurve calibration_curve(
    std::span<const double> mean, std::span<const double> std,
    std::span<const double> actual,
    const std::vector<double>& levels = default_levels(),
    models::IntervalSide side = models::IntervalSide::kOneSided);

enum class DmLoss { kSquared, kAbsolute };

struct DmResult {
  double statistic = 0.0;
  double p_value = 0.0;
};

/// Diebold-Mariano equal-accuracy test on two forecast error series.
/// Long-run variance of the loss differential uses Bartlett weights with
/// bandwidth `horizon` (truncation at horizon-1); a non-positive estimate
/// falls back to the plain variance. Two-sided normal p-value.
/// Throws DegenerateTestError when the loss differential has zero variance.
DmResult diebold_mariano(std::span<const double> errors_a,
                         std::span<const double> errors_b, DmLoss loss,
                         int horizon);

struct BpResult {
  double lm = 0.0;  // n * R^2 of the squared-residual auxiliary regression
  double p_value = 0.0;
};

/// Breusch-Pagan (Koenker studentized form): regress squared residuals on
/// [1 | regressors]; LM = n*R^2, chi-square with k = regressors.cols() dof.
/// Throws DataError on rank-deficient regressors.
BpResult breusch_pagan(std::span<const double> residuals,
                       const Eigen::MatrixXd& regressors);

/// Sample Pearson correlation; throws DegenerateTestError on zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

/// Mean pinball (quantile) loss of an upper bound at quantile q in (0, 1).
/// Asymmetric alternative to MSE/MAE for QoS-oriented scoring; not part of
/// the core table set.
double pinball_loss(std::span<const double> bound,
                    std::span<const double> actual, double quantile);

}  // namespace cloudcast::eval

#endif  // CLOUDCAST_METRICS_HPP_
