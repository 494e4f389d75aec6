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

#include "cloudcast/metrics.hpp"

#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>

#include "cloudcast/errors.hpp"

namespace cloudcast::eval {

namespace {

void check_pair(std::span<const double> a, std::span<const double> b,
                const char* what) {
  if (a.size() != b.size()) {
    throw ParameterError(std::string(what) + ": length mismatch");
  }
  if (a.empty()) throw ParameterError(std::string(what) + ": empty input");
}

}  // namespace

PointMetrics point_metrics(std::span<const double> pred_mean,
                           std::span<const double> actual) {
  check_pair(pred_mean, actual, "point_metrics");
  double se = 0.0, ae = 0.0;
  for (std::size_t i = 0; i < pred_mean.size(); ++i) {
    const double d = pred_mean[i] - actual[i];
    se += d * d;
    ae += std::abs(d);
  }
  const auto n = static_cast<double>(pred_mean.size());
  return {se / n, ae / n};
}

QoSReport qos_metrics(std::span<const double> upper_bounds,
                      std::span<const double> actual,
                      double confidence_percent) {
  check_pair(upper_bounds, actual, "qos_metrics");
  QoSReport report;
  report.confidence = confidence_percent;
  report.n = static_cast<std::int64_t>(actual.size());
  std::int64_t within = 0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    report.tpr += upper_bounds[i];
    if (actual[i] <= upper_bounds[i]) {
      ++within;
      report.op += upper_bounds[i] - actual[i];
    } else {
      report.up += actual[i] - upper_bounds[i];
    }
  }
  report.sr = 100.0 * static_cast<double>(within) /
              static_cast<double>(report.n);
  return report;
}

std::vector<double> default_levels() {
  std::vector<double> levels;
  for (int i = 0; i <= 19; ++i) levels.push_back(90.0 + 0.5 * i);
  return levels;
}

std::vector<TprSrPoint> tpr_sr_curve(std::span<const double> mean,
                                     std::span<const double> std,
                                     std::span<const double> actual,
                                     const std::vector<double>& levels,
                                     models::IntervalSide side) {
  check_pair(mean, actual, "tpr_sr_curve");
  check_pair(std, actual, "tpr_sr_curve");
  std::vector<TprSrPoint> curve;
  curve.reserve(levels.size());
  std::vector<double> bounds(mean.size());
  for (const double level : levels) {
    const double z = models::interval_z(level / 100.0, side);
    for (std::size_t i = 0; i < mean.size(); ++i) {
      bounds[i] = mean[i] + z * std[i];
    }
    const auto qos = qos_metrics(bounds, actual, level);
    curve.push_back({level, qos.tpr, qos.sr});
  }
  return curve;
}

CalibrationCurve calibration_curve(std::span<const double> mean,
                                   std::span<const double> std,
                                   std::span<const double> actual,
                                   const std::vector<double>& levels,
                                   models::IntervalSide side) {
  const auto points = tpr_sr_curve(mean, std, actual, levels, side);
  CalibrationCurve curve;
  curve.levels = levels;
  curve.achieved_sr.reserve(points.size());
  for (const auto& p : points) curve.achieved_sr.push_back(p.sr);
  double se = 0.0, ae = 0.0;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const double d = curve.achieved_sr[i] - levels[i];
    se += d * d;
    ae += std::abs(d);
  }
  const auto n = static_cast<double>(levels.size());
  curve.curve_mse = se / n;
  curve.curve_mae = ae / n;
  return curve;
}

DmResult diebold_mariano(std::span<const double> errors_a,
                         std::span<const double> errors_b, DmLoss loss,
                         int horizon) {
  check_pair(errors_a, errors_b, "diebold_mariano");
  if (errors_a.size() < 10) {
    throw ParameterError("diebold_mariano: need at least 10 observations");
  }
  if (horizon < 1) throw ParameterError("diebold_mariano: horizon must be >= 1");

  const auto n = static_cast<std::int64_t>(errors_a.size());
  std::vector<double> d(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (loss == DmLoss::kSquared) {
      d[i] = errors_a[i] * errors_a[i] - errors_b[i] * errors_b[i];
    } else {
      d[i] = std::abs(errors_a[i]) - std::abs(errors_b[i]);
    }
  }
  double dbar = 0.0;
  for (const double v : d) dbar += v;
  dbar /= static_cast<double>(n);

  auto autocov = [&](int k) {
    double g = 0.0;
    for (std::int64_t i = k; i < n; ++i) {
      g += (d[static_cast<std::size_t>(i)] - dbar) *
           (d[static_cast<std::size_t>(i - k)] - dbar);
    }
    return g / static_cast<double>(n);
  };

  const double gamma0 = autocov(0);
  if (gamma0 <= 0.0) {
    throw DegenerateTestError(
        "diebold_mariano: loss differential has zero variance");
  }
  double lrv = gamma0;
  for (int k = 1; k < horizon; ++k) {
    const double w = 1.0 - static_cast<double>(k) / horizon;
    lrv += 2.0 * w * autocov(k);
  }
  if (lrv <= 0.0) lrv = gamma0;  // small-sample guard

  DmResult result;
  result.statistic = dbar / std::sqrt(lrv / static_cast<double>(n));
  result.p_value = 2.0 * (1.0 - models::normal_cdf(std::abs(result.statistic)));
  return result;
}

BpResult breusch_pagan(std::span<const double> residuals,
                       const Eigen::MatrixXd& regressors) {
  const auto n = static_cast<Eigen::Index>(residuals.size());
  if (n == 0) throw ParameterError("breusch_pagan: empty residuals");
  if (regressors.rows() != n) {
    throw ParameterError("breusch_pagan: row count mismatch");
  }
  const Eigen::Index k = regressors.cols();
  if (k < 1) throw ParameterError("breusch_pagan: need regressors");
  if (n <= k + 1) throw ParameterError("breusch_pagan: too few observations");

  Eigen::MatrixXd x(n, k + 1);
  x.col(0).setOnes();
  x.rightCols(k) = regressors;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < k + 1) {
    throw DataError("breusch_pagan: regressors are rank deficient");
  }

  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = residuals[static_cast<std::size_t>(i)];
    y(i) = r * r;
  }
  const Eigen::VectorXd beta = qr.solve(y);
  const Eigen::VectorXd fitted = x * beta;
  const double y_mean = y.mean();
  const double sst = (y.array() - y_mean).square().sum();
  const double sse = (y - fitted).squaredNorm();

  BpResult result;
  if (sst <= 0.0) {
    // Constant squared residuals: nothing to explain.
    result.lm = 0.0;
    result.p_value = 1.0;
    return result;
  }
  const double r2 = 1.0 - sse / sst;
  result.lm = static_cast<double>(n) * r2;
  const boost::math::chi_squared_distribution<double> chi2(
      static_cast<double>(k));
  result.p_value = 1.0 - boost::math::cdf(chi2, std::max(0.0, result.lm));
  return result;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y, "pearson");
  if (x.size() < 2) throw ParameterError("pearson: need at least 2 points");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) {
    throw DegenerateTestError("pearson: zero variance input");
  }
  return sxy / std::sqrt(sxx * syy);
}

double pinball_loss(std::span<const double> bound,
                    std::span<const double> actual, double quantile) {
  check_pair(bound, actual, "pinball_loss");
  if (!(quantile > 0.0 && quantile < 1.0)) {
    throw ParameterError("pinball quantile must be in (0, 1)");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < bound.size(); ++i) {
    const double diff = actual[i] - bound[i];
    total += diff >= 0.0 ? quantile * diff : (quantile - 1.0) * diff;
  }
  return total / static_cast<double>(bound.size());
}

}  // namespace cloudcast::eval
