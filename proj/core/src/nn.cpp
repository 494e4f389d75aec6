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

#include "cloudcast/nn.hpp"

#include <cmath>

#include "cloudcast/errors.hpp"

namespace cloudcast::nn {

Activation activation_from_name(const std::string& name) {
  if (name == "linear") return Activation::kLinear;
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  if (name == "sigmoid") return Activation::kSigmoid;
  throw ParameterError("unknown activation '" + name + "'");
}

std::string activation_name(Activation act) {
  switch (act) {
    case Activation::kLinear: return "linear";
    case Activation::kRelu: return "relu";
    case Activation::kTanh: return "tanh";
    case Activation::kSigmoid: return "sigmoid";
  }
  return "linear";
}

namespace {

inline Mat sigmoid(const Mat& x) {
  return ((-x.array()).exp() + 1.0).inverse().matrix();
}

}  // namespace

void apply_activation(Activation act, Mat& pre) {
  switch (act) {
    case Activation::kLinear:
      return;
    case Activation::kRelu:
      pre = pre.cwiseMax(0.0);
      return;
    case Activation::kTanh:
      pre = pre.array().tanh().matrix();
      return;
    case Activation::kSigmoid:
      pre = sigmoid(pre);
      return;
  }
}

Mat activation_backward(Activation act, const Mat& y, const Mat& dy) {
  switch (act) {
    case Activation::kLinear:
      return dy;
    case Activation::kRelu:
      return (y.array() > 0.0).cast<double>().matrix().cwiseProduct(dy);
    case Activation::kTanh:
      return (1.0 - y.array().square()).matrix().cwiseProduct(dy);
    case Activation::kSigmoid:
      return (y.array() * (1.0 - y.array())).matrix().cwiseProduct(dy);
  }
  return dy;
}

Mat glorot_uniform(Eigen::Index fan_in, Eigen::Index fan_out,
                   rng::PortableRng& gen) {
  const double limit =
      std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Mat w(fan_in, fan_out);
  for (Eigen::Index i = 0; i < fan_in; ++i) {
    for (Eigen::Index j = 0; j < fan_out; ++j) {
      w(i, j) = gen.uniform(-limit, limit);
    }
  }
  return w;
}

// ---------------------------------------------------------------- Dense

Dense::Dense(Eigen::Index in, Eigen::Index out, Activation act,
             std::string name)
    : act_(act) {
  w_.name = name + ".w";
  b_.name = name + ".b";
  w_.value.setZero(in, out);
  b_.value.setZero(1, out);
  w_.zero_grad();
  b_.zero_grad();
}

void Dense::init(rng::PortableRng& gen) {
  w_.value = glorot_uniform(w_.value.rows(), w_.value.cols(), gen);
  b_.value.setZero();
}

const Mat& Dense::forward(const Mat& x) {
  x_ = x;
  y_ = x * w_.value;
  y_.rowwise() += b_.value.row(0);
  apply_activation(act_, y_);
  return y_;
}

Mat Dense::backward(const Mat& dy) {
  const Mat dpre = activation_backward(act_, y_, dy);
  w_.grad.noalias() += x_.transpose() * dpre;
  b_.grad.row(0) += dpre.colwise().sum();
  return dpre * w_.value.transpose();
}

std::vector<Param*> Dense::params() { return {&w_, &b_}; }

// ---------------------------------------------------------------- Conv1D

Conv1D::Conv1D(Eigen::Index in_channels, Eigen::Index filters, int width,
               Activation act, std::string name)
    : width_(width), in_channels_(in_channels), act_(act) {
  if (width < 1) throw ParameterError("conv width must be >= 1");
  w_.name = name + ".w";
  b_.name = name + ".b";
  w_.value.setZero(width * in_channels, filters);
  b_.value.setZero(1, filters);
  w_.zero_grad();
  b_.zero_grad();
}

void Conv1D::init(rng::PortableRng& gen) {
  // fan_in counts the receptive field, as Keras does for conv kernels.
  w_.value = glorot_uniform(w_.value.rows(), w_.value.cols(), gen);
  b_.value.setZero();
}

const Seq& Conv1D::forward(const Seq& x) {
  x_ = x;
  const auto steps = static_cast<Eigen::Index>(x.size());
  const Eigen::Index batch = x.empty() ? 0 : x.front().rows();
  y_.assign(static_cast<std::size_t>(steps), Mat());
  for (Eigen::Index t = 0; t < steps; ++t) {
    Mat acc = b_.value.replicate(batch, 1);
    for (int k = 0; k < width_; ++k) {
      const Eigen::Index src = t - (width_ - 1) + k;
      if (src < 0) continue;  // causal zero padding
      acc.noalias() += x[static_cast<std::size_t>(src)] *
                       w_.value.middleRows(k * in_channels_, in_channels_);
    }
    apply_activation(act_, acc);
    y_[static_cast<std::size_t>(t)] = std::move(acc);
  }
  return y_;
}

Seq Conv1D::backward(const Seq& dy) {
  const auto steps = static_cast<Eigen::Index>(dy.size());
  Seq dx(dy.size());
  for (Eigen::Index t = 0; t < steps; ++t) {
    dx[static_cast<std::size_t>(t)].setZero(dy[static_cast<std::size_t>(t)].rows(),
                                            in_channels_);
  }
  for (Eigen::Index t = 0; t < steps; ++t) {
    const Mat dpre = activation_backward(act_, y_[static_cast<std::size_t>(t)],
                                         dy[static_cast<std::size_t>(t)]);
    b_.grad.row(0) += dpre.colwise().sum();
    for (int k = 0; k < width_; ++k) {
      const Eigen::Index src = t - (width_ - 1) + k;
      if (src < 0) continue;
      w_.grad.middleRows(k * in_channels_, in_channels_).noalias() +=
          x_[static_cast<std::size_t>(src)].transpose() * dpre;
      dx[static_cast<std::size_t>(src)].noalias() +=
          dpre * w_.value.middleRows(k * in_channels_, in_channels_).transpose();
    }
  }
  return dx;
}

std::vector<Param*> Conv1D::params() { return {&w_, &b_}; }

// ---------------------------------------------------------------- Lstm

Lstm::Lstm(Eigen::Index in, Eigen::Index units, std::string name)
    : units_(units) {
  wx_.name = name + ".wx";
  wh_.name = name + ".wh";
  b_.name = name + ".b";
  wx_.value.setZero(in, 4 * units);
  wh_.value.setZero(units, 4 * units);
  b_.value.setZero(1, 4 * units);
  wx_.zero_grad();
  wh_.zero_grad();
  b_.zero_grad();
}

void Lstm::init(rng::PortableRng& gen) {
  wx_.value = glorot_uniform(wx_.value.rows(), wx_.value.cols(), gen);
  wh_.value = glorot_uniform(wh_.value.rows(), wh_.value.cols(), gen);
  b_.value.setZero();
  // Forget-gate bias starts at 1 so long-range memory survives early epochs.
  b_.value.row(0).segment(units_, units_).setOnes();
}

const Mat& Lstm::forward(const Seq& x) {
  steps_ = static_cast<Eigen::Index>(x.size());
  if (steps_ == 0) throw ParameterError("lstm: empty sequence");
  batch_ = x.front().rows();
  const Eigen::Index in = wx_.value.rows();

  // One big input projection; the recurrent GEMM stays per-step.
  x_stacked_.resize(steps_ * batch_, in);
  for (Eigen::Index t = 0; t < steps_; ++t) {
    x_stacked_.middleRows(t * batch_, batch_) = x[static_cast<std::size_t>(t)];
  }
  const Mat xproj = x_stacked_ * wx_.value;  // (T*B) x 4u

  gate_i_.assign(static_cast<std::size_t>(steps_), Mat());
  gate_f_.assign(static_cast<std::size_t>(steps_), Mat());
  gate_g_.assign(static_cast<std::size_t>(steps_), Mat());
  gate_o_.assign(static_cast<std::size_t>(steps_), Mat());
  cell_.assign(static_cast<std::size_t>(steps_), Mat());
  cell_tanh_.assign(static_cast<std::size_t>(steps_), Mat());
  h_prev_.assign(static_cast<std::size_t>(steps_), Mat());

  Mat h = Mat::Zero(batch_, units_);
  Mat c = Mat::Zero(batch_, units_);
  for (Eigen::Index t = 0; t < steps_; ++t) {
    const auto ti = static_cast<std::size_t>(t);
    h_prev_[ti] = h;
    Mat z = xproj.middleRows(t * batch_, batch_);
    z.noalias() += h * wh_.value;
    z.rowwise() += b_.value.row(0);

    gate_i_[ti] = sigmoid(z.leftCols(units_));
    gate_f_[ti] = sigmoid(z.middleCols(units_, units_));
    gate_g_[ti] = z.middleCols(2 * units_, units_).array().tanh().matrix();
    gate_o_[ti] = sigmoid(z.rightCols(units_));

    c = gate_f_[ti].cwiseProduct(c) + gate_i_[ti].cwiseProduct(gate_g_[ti]);
    cell_[ti] = c;
    cell_tanh_[ti] = c.array().tanh().matrix();
    h = gate_o_[ti].cwiseProduct(cell_tanh_[ti]);
  }
  h_last_ = h;
  return h_last_;
}

Seq Lstm::backward(const Mat& dh_last) {
  Mat dh = dh_last;
  Mat dc = Mat::Zero(batch_, units_);
  Mat dz_stacked(steps_ * batch_, 4 * units_);

  for (Eigen::Index t = steps_ - 1; t >= 0; --t) {
    const auto ti = static_cast<std::size_t>(t);
    const Mat& i = gate_i_[ti];
    const Mat& f = gate_f_[ti];
    const Mat& g = gate_g_[ti];
    const Mat& o = gate_o_[ti];
    const Mat& ct = cell_tanh_[ti];

    const Mat do_ = dh.cwiseProduct(ct);
    dc += dh.cwiseProduct(o).cwiseProduct(
        (1.0 - ct.array().square()).matrix());

    const Mat di = dc.cwiseProduct(g);
    const Mat dg = dc.cwiseProduct(i);
    const Mat c_prev = t > 0 ? cell_[ti - 1] : Mat::Zero(batch_, units_);
    const Mat df = dc.cwiseProduct(c_prev);

    Mat dz(batch_, 4 * units_);
    dz.leftCols(units_) =
        di.cwiseProduct((i.array() * (1.0 - i.array())).matrix());
    dz.middleCols(units_, units_) =
        df.cwiseProduct((f.array() * (1.0 - f.array())).matrix());
    dz.middleCols(2 * units_, units_) =
        dg.cwiseProduct((1.0 - g.array().square()).matrix());
    dz.rightCols(units_) =
        do_.cwiseProduct((o.array() * (1.0 - o.array())).matrix());

    wh_.grad.noalias() += h_prev_[ti].transpose() * dz;
    b_.grad.row(0) += dz.colwise().sum();
    dz_stacked.middleRows(t * batch_, batch_) = dz;

    dh.noalias() = dz * wh_.value.transpose();
    dc = dc.cwiseProduct(f);
  }

  wx_.grad.noalias() += x_stacked_.transpose() * dz_stacked;
  const Mat dx_stacked = dz_stacked * wx_.value.transpose();
  Seq dx(static_cast<std::size_t>(steps_));
  for (Eigen::Index t = 0; t < steps_; ++t) {
    dx[static_cast<std::size_t>(t)] = dx_stacked.middleRows(t * batch_, batch_);
  }
  return dx;
}

std::vector<Param*> Lstm::params() { return {&wx_, &wh_, &b_}; }

// ------------------------------------------------------ VariationalDense

VariationalDense::VariationalDense(Eigen::Index in, Eigen::Index out,
                                   Activation act, double rho_init,
                                   std::string name)
    : act_(act) {
  mu_w_.name = name + ".mu_w";
  rho_w_.name = name + ".rho_w";
  mu_b_.name = name + ".mu_b";
  rho_b_.name = name + ".rho_b";
  mu_w_.value.setZero(in, out);
  rho_w_.value.setConstant(in, out, rho_init);
  mu_b_.value.setZero(1, out);
  rho_b_.value.setConstant(1, out, rho_init);
  for (Param* p : params()) p->zero_grad();
}

void VariationalDense::init(rng::PortableRng& gen) {
  mu_w_.value = glorot_uniform(mu_w_.value.rows(), mu_w_.value.cols(), gen);
  mu_b_.value.setZero();
}

Mat VariationalDense::sigma_w() const {
  return rho_w_.value.unaryExpr(
      [](double r) { return std::log1p(std::exp(std::min(r, 30.0))); });
}

Mat VariationalDense::sigma_b() const {
  return rho_b_.value.unaryExpr(
      [](double r) { return std::log1p(std::exp(std::min(r, 30.0))); });
}

void VariationalDense::sample(rng::PortableRng& gen) {
  eps_w_.resize(mu_w_.value.rows(), mu_w_.value.cols());
  eps_b_.resize(1, mu_b_.value.cols());
  for (Eigen::Index i = 0; i < eps_w_.rows(); ++i) {
    for (Eigen::Index j = 0; j < eps_w_.cols(); ++j) {
      eps_w_(i, j) = gen.normal();
    }
  }
  for (Eigen::Index j = 0; j < eps_b_.cols(); ++j) eps_b_(0, j) = gen.normal();
  w_ = mu_w_.value + sigma_w().cwiseProduct(eps_w_);
  b_ = mu_b_.value + sigma_b().cwiseProduct(eps_b_);
  mean_mode_ = false;
}

void VariationalDense::use_posterior_mean() {
  w_ = mu_w_.value;
  b_ = mu_b_.value;
  mean_mode_ = true;
}

const Mat& VariationalDense::forward(const Mat& x) {
  if (w_.size() == 0) use_posterior_mean();
  x_ = x;
  y_ = x * w_;
  y_.rowwise() += b_.row(0);
  apply_activation(act_, y_);
  return y_;
}

Mat VariationalDense::backward(const Mat& dy) {
  const Mat dpre = activation_backward(act_, y_, dy);
  const Mat dw = x_.transpose() * dpre;
  const Mat db = dpre.colwise().sum();

  mu_w_.grad += dw;
  mu_b_.grad.row(0) += db.row(0);
  if (!mean_mode_) {
    // Reparameterization: w = mu + softplus(rho) * eps.
    const Mat dsig_w = rho_w_.value.unaryExpr([](double r) {
      return r >= 0.0 ? 1.0 / (1.0 + std::exp(-r))
                      : std::exp(r) / (1.0 + std::exp(r));
    });
    const Mat dsig_b = rho_b_.value.unaryExpr([](double r) {
      return r >= 0.0 ? 1.0 / (1.0 + std::exp(-r))
                      : std::exp(r) / (1.0 + std::exp(r));
    });
    rho_w_.grad += dw.cwiseProduct(eps_w_).cwiseProduct(dsig_w);
    rho_b_.grad.row(0) +=
        db.row(0).cwiseProduct(eps_b_.row(0)).cwiseProduct(dsig_b.row(0));
  }
  return dpre * w_.transpose();
}

double VariationalDense::kl() const {
  const Mat sw = sigma_w();
  const Mat sb = sigma_b();
  double kl = 0.0;
  for (Eigen::Index i = 0; i < sw.rows(); ++i) {
    for (Eigen::Index j = 0; j < sw.cols(); ++j) {
      const double s = sw(i, j);
      const double m = mu_w_.value(i, j);
      kl += 0.5 * (s * s + m * m - 1.0) - std::log(s);
    }
  }
  for (Eigen::Index j = 0; j < sb.cols(); ++j) {
    const double s = sb(0, j);
    const double m = mu_b_.value(0, j);
    kl += 0.5 * (s * s + m * m - 1.0) - std::log(s);
  }
  return kl;
}

void VariationalDense::add_kl_grad(double coeff) {
  if (coeff == 0.0) return;
  const Mat sw = sigma_w();
  const Mat sb = sigma_b();
  mu_w_.grad += coeff * mu_w_.value;
  mu_b_.grad += coeff * mu_b_.value;
  // dKL/dsigma = sigma - 1/sigma; chain through softplus.
  auto sig = [](double r) {
    return r >= 0.0 ? 1.0 / (1.0 + std::exp(-r))
                    : std::exp(r) / (1.0 + std::exp(r));
  };
  for (Eigen::Index i = 0; i < sw.rows(); ++i) {
    for (Eigen::Index j = 0; j < sw.cols(); ++j) {
      rho_w_.grad(i, j) += coeff * (sw(i, j) - 1.0 / sw(i, j)) *
                           sig(rho_w_.value(i, j));
    }
  }
  for (Eigen::Index j = 0; j < sb.cols(); ++j) {
    rho_b_.grad(0, j) += coeff * (sb(0, j) - 1.0 / sb(0, j)) *
                         sig(rho_b_.value(0, j));
  }
}

std::vector<Param*> VariationalDense::params() {
  return {&mu_w_, &rho_w_, &mu_b_, &rho_b_};
}

// ---------------------------------------------------------------- Adam

Adam::Adam(double lr, double beta1, double beta2, double weight_decay)
    : lr_(lr), beta1_(beta1), beta2_(beta2), weight_decay_(weight_decay) {
  if (lr <= 0.0) throw ParameterError("learning rate must be > 0");
}

void Adam::attach(const std::vector<Param*>& params) {
  m_.clear();
  v_.clear();
  t_ = 0;
  for (const Param* p : params) {
    m_.push_back(Mat::Zero(p->value.rows(), p->value.cols()));
    v_.push_back(Mat::Zero(p->value.rows(), p->value.cols()));
  }
}

void Adam::step(const std::vector<Param*>& params) {
  if (params.size() != m_.size()) throw ParameterError("adam: not attached");
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Param& p = *params[i];
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * p.grad;
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * p.grad.cwiseProduct(p.grad);
    const Mat m_hat = m_[i] / bc1;
    const Mat v_hat = v_[i] / bc2;
    Mat update =
        m_hat.array().cwiseQuotient(v_hat.array().sqrt() + eps_).matrix();
    if (weight_decay_ != 0.0) update += weight_decay_ * p.value;
    p.value -= lr_ * update;
  }
}

}  // namespace cloudcast::nn
