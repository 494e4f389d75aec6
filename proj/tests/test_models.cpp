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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <thread>

#include "cloudcast/errors.hpp"
#include "cloudcast/gaussian.hpp"
#include "cloudcast/model.hpp"
#include "cloudcast/rng.hpp"
#include "test_util.hpp"

using namespace cloudcast;
using models::ModelKind;

namespace {

Eigen::VectorXd vec1(double v) {
  Eigen::VectorXd out(1);
  out << v;
  return out;
}

/// Test-side inverse normal CDF (Acklam's rational approximation with one
/// Halley refinement); independent of the library used by the
/// implementation.
double oracle_normal_quantile(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double q, x;
  if (p < plow) {
    q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // one Halley step against the exact CDF
  const double e =
      0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  const double u = e * std::sqrt(2.0 * 3.14159265358979323846) *
                   std::exp(x * x / 2.0);
  return x - u / (1.0 + x * u / 2.0);
}

}  // namespace

// ------------------------------------------------------------- gaussian

TEST_CASE("gaussian_nll frozen values") {
  // standard normal at its mean: 0.5*ln(2*pi)
  CHECK(models::gaussian_nll(vec1(0.0), vec1(0.0), vec1(1.0)) ==
        doctest::Approx(0.9189385332046727).epsilon(1e-12));
  // zero residual leaves ln(std) + 0.5*ln(2*pi)
  CHECK(models::gaussian_nll(vec1(2.0), vec1(2.0), vec1(0.5)) ==
        doctest::Approx(std::log(0.5) + 0.9189385332046727));
  // bivariate NLL is the sum of the univariate ones
  Eigen::VectorXd t(2), m(2), s(2);
  t << 0.3, -1.0;
  m << 0.1, -0.4;
  s << 0.2, 1.5;
  CHECK(models::gaussian_nll(t, m, s) ==
        doctest::Approx(models::gaussian_nll(vec1(0.3), vec1(0.1), vec1(0.2)) +
                        models::gaussian_nll(vec1(-1.0), vec1(-0.4),
                                             vec1(1.5))));
  CHECK_THROWS_AS(models::gaussian_nll(vec1(0), vec1(0), vec1(0.0)),
                  ParameterError);
}

TEST_CASE("std_link value, floor and monotonicity") {
  CHECK(models::std_link(0.0) ==
        doctest::Approx(0.6931481805599453).epsilon(1e-12));
  CHECK(models::std_link(40.0) == doctest::Approx(40.0).epsilon(1e-6));
  CHECK(models::std_link(-40.0) > 0.0);
  CHECK(models::std_link(-40.0) < 2e-6);
  rng::PortableRng gen(3);
  for (int i = 0; i < 200; ++i) {
    const double x = gen.uniform(-20.0, 20.0);
    const double dx = gen.uniform(1e-6, 2.0);
    CHECK(models::std_link(x) < models::std_link(x + dx));
  }
}

TEST_CASE("nll gradient matches central differences") {
  rng::PortableRng gen(11);
  const double h = 1e-5;
  for (int i = 0; i < 100; ++i) {
    const double target = gen.uniform(-2.0, 2.0);
    const double mean = gen.uniform(-2.0, 2.0);
    const double raw = gen.uniform(-3.0, 3.0);

    const auto grad =
        models::gaussian_nll_grad(vec1(target), vec1(mean), vec1(raw));
    auto nll_at = [&](double m, double r) {
      return models::gaussian_nll(vec1(target), vec1(m),
                                  vec1(models::std_link(r)));
    };
    const double d_mean_fd =
        (nll_at(mean + h, raw) - nll_at(mean - h, raw)) / (2.0 * h);
    const double d_raw_fd =
        (nll_at(mean, raw + h) - nll_at(mean, raw - h)) / (2.0 * h);
    CHECK(grad.d_mean(0) ==
          doctest::Approx(d_mean_fd)
              .epsilon(1e-5)
              .scale(std::max(1.0, std::abs(d_mean_fd))));
    CHECK(grad.d_raw_std(0) ==
          doctest::Approx(d_raw_fd)
              .epsilon(1e-5)
              .scale(std::max(1.0, std::abs(d_raw_fd))));
  }
}

TEST_CASE("factorized gaussian KL against the standard normal") {
  CHECK(models::kl_gaussian_std_normal(0.0, 1.0) == doctest::Approx(0.0));
  CHECK(models::kl_gaussian_std_normal(1.0, 1.0) == doctest::Approx(0.5));
  rng::PortableRng gen(5);
  for (int i = 0; i < 300; ++i) {
    const double mu = gen.uniform(-3.0, 3.0);
    const double sigma = gen.uniform(0.05, 4.0);
    CHECK(models::kl_gaussian_std_normal(mu, sigma) >= -1e-12);
  }
}

TEST_CASE("interval z values match the high-precision oracle") {
  CHECK(models::interval_z(0.95) == doctest::Approx(1.959964).epsilon(1e-4));
  CHECK(models::interval_z(0.97) == doctest::Approx(2.170090).epsilon(1e-4));
  CHECK(models::interval_z(0.99) == doctest::Approx(2.575829).epsilon(1e-4));
  for (const double c : {0.90, 0.95, 0.97, 0.99, 0.995}) {
    CHECK(models::interval_z(c) ==
          doctest::Approx(oracle_normal_quantile(0.5 * (1.0 + c)))
              .epsilon(1e-9));
    CHECK(models::interval_z(c, models::IntervalSide::kOneSided) ==
          doctest::Approx(oracle_normal_quantile(c)).epsilon(1e-9));
  }
  CHECK_THROWS_AS(models::interval_z(0.0), ParameterError);
  CHECK_THROWS_AS(models::interval_z(1.0), ParameterError);
}

TEST_CASE("upper_bound arithmetic and monotonicity") {
  models::ForecastDistribution dist;
  dist.resources = {"cpu"};
  dist.target_index = {0};
  dist.mean.resize(1, 1);
  dist.mean << 0.5;
  dist.std.resize(1, 1);
  dist.std << 0.1;
  CHECK(models::upper_bound(dist, 0.95)(0, 0) ==
        doctest::Approx(0.695996).epsilon(1e-5));

  double prev = -1.0;
  for (const double c : {0.90, 0.93, 0.95, 0.97, 0.99}) {
    const double b = models::upper_bound(dist, c)(0, 0);
    CHECK(b > prev);
    prev = b;
  }
  // monotone in std as well
  models::ForecastDistribution wider = dist;
  wider.std *= 2.0;
  CHECK(models::upper_bound(wider, 0.95)(0, 0) >
        models::upper_bound(dist, 0.95)(0, 0));

  models::ForecastDistribution point = dist;
  point.std.resize(0, 0);
  CHECK(models::upper_bound(point, 0.95)(0, 0) == 0.5);  // degenerate: mean
}

TEST_CASE("moment matching follows the law of total variance") {
  Eigen::VectorXd means(2), stds(2);
  means << 0.0, 2.0;
  stds << 1.0, 1.0;
  const auto mm = models::moment_match(means, stds);
  CHECK(mm.mean == doctest::Approx(1.0));
  CHECK(mm.variance == doctest::Approx(2.0));  // 1 aleatory + 1 epistemic

  Eigen::VectorXd same_m = Eigen::VectorXd::Constant(7, 0.3);
  Eigen::VectorXd same_s = Eigen::VectorXd::Constant(7, 0.4);
  const auto degenerate = models::moment_match(same_m, same_s);
  CHECK(degenerate.mean == doctest::Approx(0.3));
  CHECK(degenerate.variance == doctest::Approx(0.16));
}

TEST_CASE("monte carlo mixture variance matches the moment match") {
  rng::PortableRng gen(17);
  Eigen::VectorXd means(20), stds(20);
  for (Eigen::Index i = 0; i < 20; ++i) {
    means(i) = gen.uniform(-1.0, 1.0);
    stds(i) = gen.uniform(0.2, 1.2);
  }
  const auto mm = models::moment_match(means, stds);

  const int n = 100000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto k = static_cast<Eigen::Index>(gen.bounded(20));
    const double draw = gen.normal(means(k), stds(k));
    sum += draw;
    sumsq += draw * draw;
  }
  const double mc_mean = sum / n;
  const double mc_var = sumsq / n - mc_mean * mc_mean;
  CHECK(mc_var == doctest::Approx(mm.variance).epsilon(0.02));
}

// ------------------------------------------------------------- networks

TEST_CASE("head widths by model kind") {
  auto cfg = testutil::tiny_config(ModelKind::kPoint, 1);
  CHECK(cfg.head_width() == 1);
  cfg.kind = ModelKind::kDistributional;
  CHECK(cfg.head_width() == 2);
  cfg.output_resources = 2;
  CHECK(cfg.head_width() == 4);  // 4 raw outputs feed two gaussians
  cfg.kind = ModelKind::kPoint;
  CHECK(cfg.head_width() == 2);

  auto net = models::build_model(testutil::tiny_config(ModelKind::kPoint, 1));
  rng::PortableRng gen(1);
  net->init(gen);
  nn::Seq input(24, nn::Mat::Constant(3, 1, 0.5));
  CHECK(net->forward(input).cols() == 1);

  auto net2 = models::build_model(
      testutil::tiny_config(ModelKind::kDistributional, 2));
  net2->init(gen);
  nn::Seq input2(24, nn::Mat::Constant(3, 2, 0.5));
  CHECK(net2->forward(input2).cols() == 4);
}

TEST_CASE("full-network gradients match finite differences") {
  // smooth activations so central differences are clean
  models::ModelConfig cfg;
  cfg.kind = ModelKind::kDistributional;
  cfg.conv_blocks = 1;
  cfg.conv_kernels = {{2, 2}};
  cfg.lstm_units = 3;
  cfg.dense_stack = {3};
  cfg.output_resources = 1;
  cfg.activation = "tanh";

  for (const bool bayesian : {false, true}) {
    if (bayesian) {
      cfg.kind = ModelKind::kBayesianLastLayer;
      cfg.posterior_rho_init = -1.0;
    }
    models::Network net(cfg);
    rng::PortableRng init(7);
    net.init(init);

    const Eigen::Index batch = 4;
    nn::Seq input(6);
    rng::PortableRng data(9);
    for (auto& step : input) {
      step.resize(batch, 1);
      for (Eigen::Index b = 0; b < batch; ++b) step(b, 0) = data.uniform(0, 1);
    }

    // scalar objective L = 0.5 * ||raw||^2 so dL/draw = raw; this checks
    // the network jacobian independently of the loss functions
    auto loss = [&]() {
      if (auto* v = net.variational()) {
        rng::PortableRng eps(42);  // same weight draw on every call
        v->sample(eps);
      }
      const auto raw = net.forward(input);
      return 0.5 * raw.squaredNorm();
    };

    (void)loss();
    net.zero_grads();
    {
      if (auto* v = net.variational()) {
        rng::PortableRng eps(42);
        v->sample(eps);
      }
      const auto raw = net.forward(input);
      net.backward(raw);
    }

    rng::PortableRng pickr(31);
    const double h = 1e-6;
    for (nn::Param* p : net.params()) {
      // spot-check a few entries of every parameter tensor
      for (int probe = 0; probe < 3; ++probe) {
        const auto i = static_cast<Eigen::Index>(
            pickr.bounded(static_cast<std::uint64_t>(p->value.rows())));
        const auto j = static_cast<Eigen::Index>(
            pickr.bounded(static_cast<std::uint64_t>(p->value.cols())));
        const double saved = p->value(i, j);
        p->value(i, j) = saved + h;
        const double up = loss();
        p->value(i, j) = saved - h;
        const double down = loss();
        p->value(i, j) = saved;
        const double fd = (up - down) / (2.0 * h);
        CHECK(p->grad(i, j) ==
              doctest::Approx(fd).epsilon(1e-5).scale(
                  std::max(1.0, std::abs(fd))));
      }
    }
  }
}

TEST_CASE("config validation rejects inconsistent settings") {
  auto cfg = testutil::tiny_config(ModelKind::kPoint, 1);
  cfg.conv_blocks = 2;  // only one kernel listed
  CHECK_THROWS_AS(cfg.validate(), ParameterError);
  cfg = testutil::tiny_config(ModelKind::kPoint, 1);
  cfg.learning_rate = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ParameterError);
  cfg = testutil::tiny_config(ModelKind::kPoint, 1);
  cfg.dense_stack.clear();
  CHECK_THROWS_AS(cfg.validate(), ParameterError);
  cfg = testutil::tiny_config(ModelKind::kPoint, 3);
  CHECK_THROWS_AS(cfg.validate(), ParameterError);
}

TEST_CASE("model config json round-trip") {
  auto cfg = testutil::tiny_config(ModelKind::kBayesianLastLayer, 2);
  cfg.kl_weight = 0.5;
  cfg.epistemic_samples = 33;
  cfg.interval_side = models::IntervalSide::kOneSided;
  const auto back = models::ModelConfig::from_json(cfg.to_json());
  CHECK(back.kind == cfg.kind);
  CHECK(back.kl_weight == cfg.kl_weight);
  CHECK(back.epistemic_samples == cfg.epistemic_samples);
  CHECK(back.interval_side == cfg.interval_side);
  CHECK(back.to_json() == cfg.to_json());
}

// ------------------------------------------------------------- training

namespace {

data::SplitBundle constant_bundle(double value, Eigen::Index total = 220,
                                  int input_len = 24) {
  data::SplitBundle bundle;
  bundle.cluster_id = "const";
  bundle.resources = {"cpu"};
  bundle.input_len = input_len;
  bundle.horizon_steps = 2;
  bundle.series = Eigen::MatrixXd::Constant(total, 1, value);
  bundle.scaler = data::MinMaxScaler({"cpu"}, Eigen::VectorXd::Zero(1),
                                     Eigen::VectorXd::Ones(1));
  const auto n = static_cast<std::int32_t>(total - input_len - 2 + 1);
  for (std::int32_t i = 0; i < n; ++i) {
    const data::SampleRef ref{i, static_cast<std::int32_t>(i + input_len + 1)};
    if (i < n * 6 / 10) {
      bundle.train.push_back(ref);
    } else if (i < n * 8 / 10) {
      bundle.val.push_back(ref);
    } else {
      bundle.test.push_back(ref);
    }
  }
  bundle.train_end = bundle.test.front().target;
  bundle.test_start = bundle.train_end;
  return bundle;
}

}  // namespace

TEST_CASE("point model learns a constant series") {
  const auto bundle = constant_bundle(0.5);
  models::TrainOptions opts;
  opts.max_epochs = 40;
  opts.patience = 40;
  opts.seed = 3;
  const auto model =
      models::train(testutil::tiny_config(ModelKind::kPoint, 1), bundle, opts);
  const auto dist = models::predict_distribution(model, bundle, bundle.val);
  for (Eigen::Index i = 0; i < dist.rows(); ++i) {
    CHECK(dist.mean(i, 0) == doctest::Approx(0.5).epsilon(0.02));
  }
  CHECK(!dist.has_std());
}

TEST_CASE("training is deterministic per seed") {
  const auto bundle = testutil::small_bundle(500, 1, 31);
  models::TrainOptions opts;
  opts.max_epochs = 4;
  opts.patience = 4;
  opts.seed = 9;
  const auto cfg = testutil::tiny_config(ModelKind::kDistributional, 1);
  const auto a = models::train(cfg, bundle, opts);
  const auto b = models::train(cfg, bundle, opts);
  CHECK(a.history.back().val_loss == b.history.back().val_loss);
  CHECK(a.weights_hash() == b.weights_hash());

  opts.seed = 10;
  const auto c = models::train(cfg, bundle, opts);
  CHECK(a.weights_hash() != c.weights_hash());
}

TEST_CASE("patience zero stops after the first non-improving epoch") {
  const auto bundle = testutil::small_bundle(500, 1, 31);
  models::TrainOptions opts;
  opts.max_epochs = 50;
  opts.patience = 0;
  opts.seed = 2;
  const auto model = models::train(
      testutil::tiny_config(ModelKind::kDistributional, 1), bundle, opts);
  // the run ends exactly one epoch after its last improvement
  double best = std::numeric_limits<double>::infinity();
  int best_epoch = -1;
  for (std::size_t i = 0; i < model.history.size(); ++i) {
    if (model.history[i].val_loss < best) {
      best = model.history[i].val_loss;
      best_epoch = static_cast<int>(i);
    }
  }
  CHECK(model.stop_epoch == best_epoch + 2);
}

TEST_CASE("degenerate-posterior hbnn tracks lstmd") {
  const auto bundle = testutil::small_bundle(600, 1, 13);
  models::TrainOptions opts;
  opts.max_epochs = 6;
  opts.patience = 6;
  opts.seed = 21;

  auto lstmd_cfg = testutil::tiny_config(ModelKind::kDistributional, 1);
  auto hbnn_cfg = testutil::tiny_config(ModelKind::kBayesianLastLayer, 1);
  hbnn_cfg.kl_weight = 0.0;
  hbnn_cfg.posterior_rho_init = -20.0;  // sigma ~ 2e-9: pinned near zero

  const auto lstmd = models::train(lstmd_cfg, bundle, opts);
  const auto hbnn = models::train(hbnn_cfg, bundle, opts);
  const double a = lstmd.history.back().val_loss;
  const double b = hbnn.history.back().val_loss;
  CHECK(std::abs(a - b) / std::abs(a) < 0.10);
}

TEST_CASE("bayesian prediction: degenerate samples collapse exactly") {
  Eigen::VectorXd m = Eigen::VectorXd::Constant(5, 0.7);
  Eigen::VectorXd s = Eigen::VectorXd::Constant(5, 0.2);
  const auto mm = models::moment_match(m, s);
  CHECK(mm.mean == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(std::sqrt(mm.variance) == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("weight-sampled prediction keeps std above the floor") {
  const auto bundle = testutil::small_bundle(500, 1, 77);
  models::TrainOptions opts;
  opts.max_epochs = 2;
  opts.patience = 2;
  opts.seed = 5;
  auto cfg = testutil::tiny_config(ModelKind::kBayesianLastLayer, 1);
  cfg.epistemic_samples = 8;
  const auto model = models::train(cfg, bundle, opts);
  const auto dist = models::predict_distribution(model, bundle, bundle.test);
  REQUIRE(dist.has_std());
  CHECK((dist.std.array() > models::kStdFloor).all());

  // law of total variance on the sample set, exactly
  const auto samples =
      models::predict_weight_samples(model, bundle, bundle.test, 8, 123);
  const auto matched = models::moment_match_samples(samples);
  for (Eigen::Index i = 0; i < matched.rows(); ++i) {
    double mean_of_means = 0.0, mean_alea = 0.0;
    for (int s = 0; s < 8; ++s) {
      mean_of_means += samples.means[static_cast<std::size_t>(s)](i, 0);
      const double sd = samples.stds[static_cast<std::size_t>(s)](i, 0);
      mean_alea += sd * sd;
    }
    mean_of_means /= 8.0;
    mean_alea /= 8.0;
    double var_means = 0.0;
    for (int s = 0; s < 8; ++s) {
      const double d =
          samples.means[static_cast<std::size_t>(s)](i, 0) - mean_of_means;
      var_means += d * d;
    }
    var_means /= 8.0;
    const double v = matched.std(i, 0) * matched.std(i, 0);
    CHECK(v == doctest::Approx(mean_alea + var_means).epsilon(1e-9));
    CHECK(v >= mean_alea - 1e-12);
  }
}

TEST_CASE("distributional predictions respect the std floor") {
  const auto bundle = testutil::small_bundle(500, 1, 31);
  models::TrainOptions opts;
  opts.max_epochs = 2;
  opts.patience = 2;
  opts.seed = 6;
  const auto model = models::train(
      testutil::tiny_config(ModelKind::kDistributional, 1), bundle, opts);
  const auto dist = models::predict_distribution(model, bundle, bundle.test);
  REQUIRE(dist.has_std());
  CHECK((dist.std.array() > models::kStdFloor).all());
}

TEST_CASE("concurrent inference on one trained model is safe") {
  const auto bundle = testutil::small_bundle(500, 1, 31);
  models::TrainOptions opts;
  opts.max_epochs = 2;
  opts.patience = 2;
  opts.seed = 8;
  const auto model = models::train(
      testutil::tiny_config(ModelKind::kDistributional, 1), bundle, opts);
  const auto reference =
      models::predict_distribution(model, bundle, bundle.test);

  std::vector<std::thread> threads;
  std::array<nn::Mat, 4> results;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      results[static_cast<std::size_t>(t)] =
          models::predict_distribution(model, bundle, bundle.test).mean;
    });
  }
  for (auto& thread : threads) thread.join();
  for (const auto& mean : results) {
    CHECK((mean - reference.mean).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("divergence raises a diagnostic error") {
  const auto bundle = testutil::small_bundle(500, 1, 31);
  auto cfg = testutil::tiny_config(ModelKind::kDistributional, 1);
  cfg.learning_rate = 1e300;  // first step overflows the activations
  models::TrainOptions opts;
  opts.max_epochs = 3;
  opts.patience = 3;
  opts.seed = 1;
  CHECK_THROWS_AS(models::train(cfg, bundle, opts), TrainingDiverged);
}

TEST_CASE("checkpoint round-trip preserves weights and history") {
  testutil::TempDir tmp("ckpt");
  const auto bundle = testutil::small_bundle(500, 1, 31);
  models::TrainOptions opts;
  opts.max_epochs = 3;
  opts.patience = 3;
  opts.seed = 4;
  const auto model = models::train(
      testutil::tiny_config(ModelKind::kDistributional, 1), bundle, opts);
  models::save_checkpoint(model, tmp.path() / "ckpt");
  const auto back = models::load_checkpoint(tmp.path() / "ckpt");
  CHECK(back.weights_hash() == model.weights_hash());
  CHECK(back.history.size() == model.history.size());
  CHECK(back.stop_epoch == model.stop_epoch);
  CHECK(back.seed == model.seed);

  const auto a = models::predict_distribution(model, bundle, bundle.test);
  const auto b = models::predict_distribution(back, bundle, bundle.test);
  CHECK((a.mean - b.mean).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("predictions csv round-trip, including the point format") {
  testutil::TempDir tmp("pred");
  models::ForecastDistribution dist;
  dist.cluster_id = "c";
  dist.resources = {"cpu", "memory"};
  dist.target_index = {10, 11, 12};
  dist.mean.resize(3, 2);
  dist.mean << 0.1, 0.2, 0.3, 0.4, 0.5, 0.6;
  dist.std.resize(3, 2);
  dist.std << 0.01, 0.02, 0.03, 0.04, 0.05, 0.06;

  const auto path = tmp.path() / "p.csv";
  models::write_predictions_csv(path, dist);
  const auto back = models::read_predictions_csv(path);
  CHECK(back.cluster_id == "c");
  CHECK(back.resources == dist.resources);
  CHECK(back.target_index == dist.target_index);
  CHECK((back.mean - dist.mean).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.std - dist.std).cwiseAbs().maxCoeff() == 0.0);

  dist.std.resize(0, 0);  // point forecast leaves the column empty
  models::write_predictions_csv(path, dist);
  const auto point = models::read_predictions_csv(path);
  CHECK(!point.has_std());
}
