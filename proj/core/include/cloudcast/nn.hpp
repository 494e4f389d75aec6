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

#ifndef CLOUDCAST_NN_HPP_
#define CLOUDCAST_NN_HPP_

#include <Eigen/Core>
#include <memory>
#include <string>
#include <vector>

#include "cloudcast/rng.hpp"

// Small dense-algebra network stack. Double precision throughout: training
// runs are bitwise reproducible and analytic gradients can be checked
// against central differences at tight tolerances.
namespace cloudcast::nn {

using Mat = Eigen::MatrixXd;
/// Time-major activation sequence: seq[t] is batch x channels.
using Seq = std::vector<Mat>;

enum class Activation { kLinear, kRelu, kTanh, kSigmoid };

Activation activation_from_name(const std::string& name);
std::string activation_name(Activation act);

void apply_activation(Activation act, Mat& pre);
/// Gradient through an activation given its *output* y: dy -> d(pre).
Mat activation_backward(Activation act, const Mat& y, const Mat& dy);

struct Param {
  std::string name;
  Mat value;
  Mat grad;

  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

/// Fully connected layer, y = act(x W + b).
class Dense {
 public:
  Dense(Eigen::Index in, Eigen::Index out, Activation act, std::string name);

  void init(rng::PortableRng& gen);
  const Mat& forward(const Mat& x);
  Mat backward(const Mat& dy);  // accumulates parameter grads, returns dx
  std::vector<Param*> params();

  Eigen::Index in_dim() const { return w_.value.rows(); }
  Eigen::Index out_dim() const { return w_.value.cols(); }

 private:
  Param w_, b_;
  Activation act_;
  Mat x_, y_;
};

/// 1-D convolution over the time axis, causal zero padding, stride 1;
/// output length equals input length.
class Conv1D {
 public:
  Conv1D(Eigen::Index in_channels, Eigen::Index filters, int width,
         Activation act, std::string name);

  void init(rng::PortableRng& gen);
  const Seq& forward(const Seq& x);
  Seq backward(const Seq& dy);
  std::vector<Param*> params();

  Eigen::Index filters() const { return w_.value.cols(); }
  int width() const { return width_; }

 private:
  Param w_;  // (width * in_channels) x filters; row block k = tap k
  Param b_;  // 1 x filters
  int width_;
  Eigen::Index in_channels_;
  Activation act_;
  Seq x_, y_;
};

/// LSTM over the full sequence; emits the last hidden state only.
class Lstm {
 public:
  Lstm(Eigen::Index in, Eigen::Index units, std::string name);

  void init(rng::PortableRng& gen);
  const Mat& forward(const Seq& x);   // batch x units
  Seq backward(const Mat& dh_last);   // BPTT
  std::vector<Param*> params();

  Eigen::Index units() const { return units_; }

 private:
  Param wx_;  // in x 4u, gate order i, f, g, o
  Param wh_;  // u x 4u
  Param b_;   // 1 x 4u
  Eigen::Index units_;
  // forward caches
  Mat x_stacked_;            // (T*B) x in
  std::vector<Mat> gate_i_, gate_f_, gate_g_, gate_o_, cell_, cell_tanh_, h_prev_;
  Mat h_last_;
  Eigen::Index batch_ = 0;
  Eigen::Index steps_ = 0;
};

/// Dense layer with a factorized Gaussian posterior over kernel and bias
/// (prior N(0,1)); forward passes use a reparameterized weight sample.
class VariationalDense {
 public:
  VariationalDense(Eigen::Index in, Eigen::Index out, Activation act,
                   double rho_init, std::string name);

  void init(rng::PortableRng& gen);

  /// Draws one weight sample for subsequent forward passes.
  void sample(rng::PortableRng& gen);
  /// Uses the posterior means as weights (deterministic evaluation).
  void use_posterior_mean();

  const Mat& forward(const Mat& x);
  Mat backward(const Mat& dy);

  /// Total KL(q || N(0,1)) over kernel and bias.
  double kl() const;
  /// Adds coeff * dKL/dparam to the posterior parameter gradients.
  void add_kl_grad(double coeff);

  std::vector<Param*> params();
  Eigen::Index out_dim() const { return mu_w_.value.cols(); }

 private:
  Mat sigma_w() const;
  Mat sigma_b() const;

  Param mu_w_, rho_w_, mu_b_, rho_b_;
  Activation act_;
  Mat eps_w_, eps_b_;  // the draw behind the current weight sample
  bool mean_mode_ = true;
  Mat w_, b_;  // materialized weights
  Mat x_, y_;
};

/// Adam with optional decoupled weight decay.
class Adam {
 public:
  Adam(double lr, double beta1, double beta2, double weight_decay);

  void attach(const std::vector<Param*>& params);
  void step(const std::vector<Param*>& params);
  void set_learning_rate(double lr) { lr_ = lr; }
  double learning_rate() const { return lr_; }

 private:
  double lr_, beta1_, beta2_, weight_decay_;
  double eps_ = 1e-8;
  long t_ = 0;
  std::vector<Mat> m_, v_;
};

/// Uniform Glorot initialization for a fan_in x fan_out kernel.
Mat glorot_uniform(Eigen::Index fan_in, Eigen::Index fan_out,
                   rng::PortableRng& gen);

}  // namespace cloudcast::nn

#endif  // CLOUDCAST_NN_HPP_
