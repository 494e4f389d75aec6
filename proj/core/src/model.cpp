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

#include "cloudcast/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <sstream>

#include "cloudcast/csv.hpp"
#include "cloudcast/errors.hpp"
#include "cloudcast/hash.hpp"

namespace cloudcast::models {

using data::SampleRef;
using data::SplitBundle;
using data::StreamSample;
using data::TrainStream;

ModelKind model_kind_from_name(const std::string& name) {
  if (name == "point" || name == "lstm") return ModelKind::kPoint;
  if (name == "distributional" || name == "lstmd") {
    return ModelKind::kDistributional;
  }
  if (name == "bayesian_last_layer" || name == "hbnn") {
    return ModelKind::kBayesianLastLayer;
  }
  throw ParameterError("unknown model kind '" + name + "'");
}

std::string model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::kPoint: return "point";
    case ModelKind::kDistributional: return "distributional";
    case ModelKind::kBayesianLastLayer: return "bayesian_last_layer";
  }
  return "point";
}

std::string model_short_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::kPoint: return "lstm";
    case ModelKind::kDistributional: return "lstmd";
    case ModelKind::kBayesianLastLayer: return "hbnn";
  }
  return "lstm";
}

void ModelConfig::validate() const {
  if (conv_blocks < 1 || conv_blocks > 3) {
    throw ParameterError("conv_blocks must be in [1, 3]");
  }
  if (static_cast<int>(conv_kernels.size()) != conv_blocks) {
    throw ParameterError("conv_blocks must match conv_kernels length");
  }
  for (const auto& k : conv_kernels) {
    if (k.filters < 1 || k.width < 1) {
      throw ParameterError("conv kernels need filters >= 1 and width >= 1");
    }
  }
  if (lstm_units < 1) throw ParameterError("lstm_units must be >= 1");
  if (dense_stack.empty()) throw ParameterError("dense_stack must be non-empty");
  for (int units : dense_stack) {
    if (units < 1) throw ParameterError("dense_stack entries must be >= 1");
  }
  if (output_resources != 1 && output_resources != 2) {
    throw ParameterError("output_resources must be 1 or 2");
  }
  if (!(learning_rate > 0.0)) throw ParameterError("learning_rate must be > 0");
  if (batch_size < 1) throw ParameterError("batch_size must be >= 1");
  if (adam_beta1 < 0.0 || adam_beta1 >= 1.0 || adam_beta2 < 0.0 ||
      adam_beta2 >= 1.0) {
    throw ParameterError("adam betas must be in [0, 1)");
  }
  if (weight_decay < 0.0) throw ParameterError("weight_decay must be >= 0");
  if (kl_weight < 0.0) throw ParameterError("kl_weight must be >= 0");
  if (epistemic_samples < 1) {
    throw ParameterError("epistemic_samples must be >= 1");
  }
  nn::activation_from_name(activation);
}

int ModelConfig::head_width() const {
  return kind == ModelKind::kPoint ? output_resources : 2 * output_resources;
}

std::string ModelConfig::to_json() const {
  nlohmann::json j;
  j["kind"] = model_kind_name(kind);
  j["conv_blocks"] = conv_blocks;
  for (const auto& k : conv_kernels) {
    j["conv_kernels"].push_back({{"filters", k.filters}, {"width", k.width}});
  }
  j["lstm_units"] = lstm_units;
  j["dense_stack"] = dense_stack;
  j["output_resources"] = output_resources;
  j["activation"] = activation;
  j["learning_rate"] = learning_rate;
  j["batch_size"] = batch_size;
  j["adam_beta1"] = adam_beta1;
  j["adam_beta2"] = adam_beta2;
  j["weight_decay"] = weight_decay;
  j["kl_weight"] = kl_weight;
  j["epistemic_samples"] = epistemic_samples;
  j["posterior_rho_init"] = posterior_rho_init;
  j["interval_side"] =
      interval_side == IntervalSide::kTwoSided ? "two_sided" : "one_sided";
  return j.dump(2);
}

ModelConfig ModelConfig::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  ModelConfig c;
  if (j.contains("kind")) c.kind = model_kind_from_name(j.at("kind"));
  c.conv_blocks = j.value("conv_blocks", c.conv_blocks);
  if (j.contains("conv_kernels")) {
    c.conv_kernels.clear();
    for (const auto& k : j.at("conv_kernels")) {
      c.conv_kernels.push_back(
          {k.at("filters").get<int>(), k.at("width").get<int>()});
    }
  }
  c.lstm_units = j.value("lstm_units", c.lstm_units);
  if (j.contains("dense_stack")) {
    c.dense_stack = j.at("dense_stack").get<std::vector<int>>();
  }
  c.output_resources = j.value("output_resources", c.output_resources);
  c.activation = j.value("activation", c.activation);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.adam_beta1 = j.value("adam_beta1", c.adam_beta1);
  c.adam_beta2 = j.value("adam_beta2", c.adam_beta2);
  c.weight_decay = j.value("weight_decay", c.weight_decay);
  c.kl_weight = j.value("kl_weight", c.kl_weight);
  c.epistemic_samples = j.value("epistemic_samples", c.epistemic_samples);
  c.posterior_rho_init = j.value("posterior_rho_init", c.posterior_rho_init);
  if (j.contains("interval_side")) {
    const auto side = j.at("interval_side").get<std::string>();
    if (side == "two_sided") {
      c.interval_side = IntervalSide::kTwoSided;
    } else if (side == "one_sided") {
      c.interval_side = IntervalSide::kOneSided;
    } else {
      throw ParameterError("interval_side must be two_sided or one_sided");
    }
  }
  c.validate();
  return c;
}

ModelConfig ModelConfig::from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ArtifactError("cannot open model config: " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return from_json(text);
}

TrainOptions TrainOptions::from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ArtifactError("cannot open train options: " + path.string());
  nlohmann::json j;
  in >> j;
  const nlohmann::json& t = j.contains("train") ? j.at("train") : j;
  TrainOptions opts;
  opts.max_epochs = t.value("max_epochs", opts.max_epochs);
  opts.patience = t.value("patience", opts.patience);
  opts.seed = t.value("seed", opts.seed);
  return opts;
}

// ---------------------------------------------------------------- Network

Network::Network(const ModelConfig& config)
    : config_(config),
      lstm_(config.conv_kernels.back().filters, config.lstm_units, "lstm"),
      head_(config.dense_stack.back(), config.head_width(),
            nn::Activation::kLinear, "head") {
  config_.validate();
  const auto act = nn::activation_from_name(config_.activation);

  Eigen::Index channels = config_.output_resources;
  for (int i = 0; i < config_.conv_blocks; ++i) {
    const auto& k = config_.conv_kernels[static_cast<std::size_t>(i)];
    convs_.emplace_back(channels, k.filters, k.width, act,
                        "conv" + std::to_string(i));
    channels = k.filters;
  }

  Eigen::Index width = config_.lstm_units;
  const std::size_t n_stack = config_.dense_stack.size();
  for (std::size_t i = 0; i < n_stack; ++i) {
    const Eigen::Index units = config_.dense_stack[i];
    const bool is_last = (i + 1 == n_stack);
    if (is_last && config_.kind == ModelKind::kBayesianLastLayer) {
      vdense_ = std::make_unique<nn::VariationalDense>(
          width, units, act, config_.posterior_rho_init, "vdense");
    } else {
      denses_.emplace_back(width, units, act, "dense" + std::to_string(i));
    }
    width = units;
  }
}

void Network::init(rng::PortableRng& gen) {
  for (auto& conv : convs_) conv.init(gen);
  lstm_.init(gen);
  for (auto& dense : denses_) dense.init(gen);
  if (vdense_) vdense_->init(gen);
  head_.init(gen);
}

nn::Mat Network::forward(const nn::Seq& input) {
  const nn::Seq* seq = &input;
  for (auto& conv : convs_) seq = &conv.forward(*seq);
  nn::Mat h = lstm_.forward(*seq);
  for (auto& dense : denses_) h = dense.forward(h);
  if (vdense_) h = vdense_->forward(h);
  return head_.forward(h);
}

void Network::backward(const nn::Mat& d_raw) {
  nn::Mat dh = head_.backward(d_raw);
  if (vdense_) dh = vdense_->backward(dh);
  for (auto it = denses_.rbegin(); it != denses_.rend(); ++it) {
    dh = it->backward(dh);
  }
  nn::Seq dseq = lstm_.backward(dh);
  for (auto it = convs_.rbegin(); it != convs_.rend(); ++it) {
    dseq = it->backward(dseq);
  }
}

void Network::zero_grads() {
  for (nn::Param* p : params()) p->zero_grad();
}

std::vector<nn::Param*> Network::params() {
  std::vector<nn::Param*> out;
  for (auto& conv : convs_) {
    for (nn::Param* p : conv.params()) out.push_back(p);
  }
  for (nn::Param* p : lstm_.params()) out.push_back(p);
  for (auto& dense : denses_) {
    for (nn::Param* p : dense.params()) out.push_back(p);
  }
  if (vdense_) {
    for (nn::Param* p : vdense_->params()) out.push_back(p);
  }
  for (nn::Param* p : head_.params()) out.push_back(p);
  return out;
}

std::unique_ptr<Network> Network::clone() const {
  auto copy = std::make_unique<Network>(config_);
  auto& self = const_cast<Network&>(*this);  // params() is logically const
  auto src = self.params();
  auto dst = copy->params();
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[i]->value = src[i]->value;
    dst[i]->zero_grad();
  }
  return copy;
}

std::unique_ptr<Network> build_model(const ModelConfig& config) {
  return std::make_unique<Network>(config);
}

// ------------------------------------------------------------ training

namespace {

nn::Seq gather_inputs(const std::vector<StreamSample>& samples,
                      std::size_t begin, std::size_t end, int input_len) {
  const auto batch = static_cast<Eigen::Index>(end - begin);
  const Eigen::Index r = samples[begin].bundle->resource_count();
  nn::Seq seq(static_cast<std::size_t>(input_len));
  for (int t = 0; t < input_len; ++t) {
    nn::Mat x(batch, r);
    for (std::size_t i = begin; i < end; ++i) {
      const auto& s = samples[i];
      x.row(static_cast<Eigen::Index>(i - begin)) =
          s.bundle->series.row(s.ref.start + t);
    }
    seq[static_cast<std::size_t>(t)] = std::move(x);
  }
  return seq;
}

nn::Mat gather_targets(const std::vector<StreamSample>& samples,
                       std::size_t begin, std::size_t end) {
  const auto batch = static_cast<Eigen::Index>(end - begin);
  const Eigen::Index r = samples[begin].bundle->resource_count();
  nn::Mat y(batch, r);
  for (std::size_t i = begin; i < end; ++i) {
    y.row(static_cast<Eigen::Index>(i - begin)) =
        samples[i].bundle->series.row(samples[i].ref.target);
  }
  return y;
}

struct LossGrad {
  double loss = 0.0;
  nn::Mat d_raw;
};

LossGrad loss_and_grad(ModelKind kind, const nn::Mat& raw,
                       const nn::Mat& targets) {
  const Eigen::Index batch = raw.rows();
  const Eigen::Index r = targets.cols();
  LossGrad out;
  if (kind == ModelKind::kPoint) {
    const nn::Mat resid = raw - targets;
    const double denom = static_cast<double>(batch * r);
    out.loss = resid.squaredNorm() / denom;
    out.d_raw = (2.0 / denom) * resid;
    return out;
  }
  out.d_raw.setZero(batch, 2 * r);
  const auto inv_batch = 1.0 / static_cast<double>(batch);
  for (Eigen::Index i = 0; i < batch; ++i) {
    for (Eigen::Index c = 0; c < r; ++c) {
      const double raw_std = raw(i, r + c);
      const double s = std_link(raw_std);
      const double diff = targets(i, c) - raw(i, c);
      const double z = diff / s;
      out.loss += std::log(s) + kHalfLog2Pi + 0.5 * z * z;
      out.d_raw(i, c) = -diff / (s * s) * inv_batch;
      out.d_raw(i, r + c) =
          (1.0 / s - (diff * diff) / (s * s * s)) * std_link_grad(raw_std) *
          inv_batch;
    }
  }
  out.loss *= inv_batch;
  return out;
}

double batch_loss_only(ModelKind kind, const nn::Mat& raw,
                       const nn::Mat& targets) {
  const Eigen::Index batch = raw.rows();
  const Eigen::Index r = targets.cols();
  if (kind == ModelKind::kPoint) {
    return (raw - targets).squaredNorm() / static_cast<double>(batch * r);
  }
  double loss = 0.0;
  for (Eigen::Index i = 0; i < batch; ++i) {
    for (Eigen::Index c = 0; c < r; ++c) {
      const double s = std_link(raw(i, r + c));
      const double z = (targets(i, c) - raw(i, c)) / s;
      loss += std::log(s) + kHalfLog2Pi + 0.5 * z * z;
    }
  }
  return loss / static_cast<double>(batch);
}

double eval_loss(Network& net, const std::vector<StreamSample>& samples,
                 int input_len, int batch_size) {
  if (samples.empty()) throw DataError("validation set is empty");
  if (auto* v = net.variational()) v->use_posterior_mean();
  double total = 0.0;
  std::size_t done = 0;
  while (done < samples.size()) {
    const std::size_t end =
        std::min(done + static_cast<std::size_t>(batch_size), samples.size());
    const auto seq = gather_inputs(samples, done, end, input_len);
    const auto targets = gather_targets(samples, done, end);
    const auto raw = net.forward(seq);
    total += batch_loss_only(net.config().kind, raw, targets) *
             static_cast<double>(end - done);
    done = end;
  }
  return total / static_cast<double>(samples.size());
}

std::vector<nn::Mat> snapshot_params(Network& net) {
  std::vector<nn::Mat> snap;
  for (nn::Param* p : net.params()) snap.push_back(p->value);
  return snap;
}

void restore_params(Network& net, const std::vector<nn::Mat>& snap) {
  auto params = net.params();
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = snap[i];
}

void run_training(TrainedModel& model, const TrainStream& stream,
                  const TrainOptions& opts) {
  Network& net = *model.net;
  const ModelConfig& config = model.config;
  if (stream.train.empty()) throw DataError("training stream is empty");
  if (stream.val.empty()) throw DataError("validation stream is empty");

  rng::PortableRng data_rng(rng::derive_seed(opts.seed, 2));
  rng::PortableRng weight_rng(rng::derive_seed(opts.seed, 3));

  const double lr = opts.learning_rate_override.value_or(config.learning_rate);
  nn::Adam adam(lr, config.adam_beta1, config.adam_beta2, config.weight_decay);
  auto params = net.params();
  adam.attach(params);

  const double kl_coeff =
      config.kind == ModelKind::kBayesianLastLayer
          ? config.kl_weight / static_cast<double>(stream.train.size())
          : 0.0;

  std::vector<std::size_t> order(stream.train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  double best_val = std::numeric_limits<double>::infinity();
  std::vector<nn::Mat> best_weights = snapshot_params(net);
  int wait = 0;
  int epochs_run = 0;

  std::vector<StreamSample> batch;
  for (int epoch = 0; epoch < opts.max_epochs; ++epoch) {
    data_rng.shuffle(order);
    double epoch_loss = 0.0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(
          start + static_cast<std::size_t>(config.batch_size), order.size());
      batch.clear();
      for (std::size_t i = start; i < end; ++i) {
        batch.push_back(stream.train[order[i]]);
      }
      if (auto* v = net.variational()) v->sample(weight_rng);

      const auto seq = gather_inputs(batch, 0, batch.size(), stream.input_len);
      const auto targets = gather_targets(batch, 0, batch.size());
      const auto raw = net.forward(seq);
      auto lg = loss_and_grad(config.kind, raw, targets);
      if (auto* v = net.variational()) lg.loss += kl_coeff * v->kl();
      if (!std::isfinite(lg.loss)) {
        throw TrainingDiverged("non-finite loss at epoch " +
                               std::to_string(epoch + 1) + ", batch offset " +
                               std::to_string(start));
      }
      net.zero_grads();
      net.backward(lg.d_raw);
      if (auto* v = net.variational()) v->add_kl_grad(kl_coeff);
      adam.step(params);

      epoch_loss += lg.loss * static_cast<double>(batch.size());
      seen += batch.size();
    }

    const double train_loss = epoch_loss / static_cast<double>(seen);
    const double val_loss =
        eval_loss(net, stream.val, stream.input_len, config.batch_size);
    model.history.push_back({train_loss, val_loss});
    ++epochs_run;

    if (val_loss < best_val) {
      best_val = val_loss;
      best_weights = snapshot_params(net);
      wait = 0;
    } else {
      ++wait;
      if (wait > opts.patience) break;
    }
  }

  restore_params(net, best_weights);
  if (auto* v = net.variational()) v->use_posterior_mean();
  model.stop_epoch += epochs_run;
}

}  // namespace

TrainedModel train(const ModelConfig& config, const TrainStream& stream,
                   const TrainOptions& opts) {
  config.validate();
  if (stream.resource_count != config.output_resources) {
    throw ParameterError("stream resources do not match model config");
  }
  TrainedModel model;
  model.config = config;
  model.seed = opts.seed;
  model.net = std::make_unique<Network>(config);
  rng::PortableRng init_rng(rng::derive_seed(opts.seed, 1));
  model.net->init(init_rng);
  run_training(model, stream, opts);
  return model;
}

TrainedModel train(const ModelConfig& config, const SplitBundle& bundle,
                   const TrainOptions& opts) {
  return train(config, data::to_stream(bundle, opts.seed), opts);
}

void continue_training(TrainedModel& model, const TrainStream& stream,
                       const TrainOptions& opts) {
  if (!model.net) throw ParameterError("model has no weights");
  if (stream.resource_count != model.config.output_resources) {
    throw ParameterError("stream resources do not match model config");
  }
  if (opts.max_epochs <= 0) return;
  run_training(model, stream, opts);
}

TrainedModel TrainedModel::clone() const {
  TrainedModel copy;
  copy.config = config;
  copy.net = net ? net->clone() : nullptr;
  copy.history = history;
  copy.stop_epoch = stop_epoch;
  copy.seed = seed;
  return copy;
}

// ------------------------------------------------------------ predictions

namespace {

std::vector<StreamSample> as_stream_samples(const SplitBundle& bundle,
                                            const std::vector<SampleRef>& refs) {
  std::vector<StreamSample> out;
  out.reserve(refs.size());
  for (const auto& ref : refs) out.push_back({&bundle, ref});
  return out;
}

/// Raw head outputs over all refs, chunked; uses whatever weights are
/// materialized in `net`.
nn::Mat forward_all(Network& net, const SplitBundle& bundle,
                    const std::vector<StreamSample>& samples, int chunk) {
  nn::Mat raw(static_cast<Eigen::Index>(samples.size()),
              net.config().head_width());
  std::size_t done = 0;
  while (done < samples.size()) {
    const std::size_t end =
        std::min(done + static_cast<std::size_t>(chunk), samples.size());
    const auto seq = gather_inputs(samples, done, end, bundle.input_len);
    raw.middleRows(static_cast<Eigen::Index>(done),
                   static_cast<Eigen::Index>(end - done)) = net.forward(seq);
    done = end;
  }
  return raw;
}

void split_raw(const nn::Mat& raw, Eigen::Index r, nn::Mat& mean,
               nn::Mat& std) {
  mean = raw.leftCols(r);
  std = raw.rightCols(r).unaryExpr([](double v) { return std_link(v); });
}

}  // namespace

ForecastDistribution predict_distribution(const TrainedModel& model,
                                          const SplitBundle& bundle,
                                          const std::vector<SampleRef>& refs) {
  if (!model.net || model.history.empty()) {
    throw ParameterError("model is not trained");
  }
  if (bundle.resource_count() != model.config.output_resources) {
    throw ParameterError("bundle resources do not match model config");
  }
  if (refs.empty()) throw DataError("no samples to predict");

  ForecastDistribution dist;
  dist.cluster_id = bundle.cluster_id;
  dist.resources = bundle.resources;
  dist.target_index.reserve(refs.size());
  for (const auto& ref : refs) dist.target_index.push_back(ref.target);

  const Eigen::Index r = bundle.resource_count();
  const auto samples = as_stream_samples(bundle, refs);

  if (model.config.kind == ModelKind::kBayesianLastLayer) {
    const auto gaussians = predict_weight_samples(
        model, bundle, refs, model.config.epistemic_samples,
        rng::derive_seed(model.seed, 99));
    ForecastDistribution matched = moment_match_samples(gaussians);
    matched.cluster_id = dist.cluster_id;
    matched.resources = dist.resources;
    matched.target_index = std::move(dist.target_index);
    return matched;
  }

  // Inference works on a private copy so concurrent calls on the same
  // TrainedModel never share forward caches.
  auto net = model.net->clone();
  const nn::Mat raw =
      forward_all(*net, bundle, samples, model.config.batch_size);
  if (model.config.kind == ModelKind::kPoint) {
    dist.mean = raw;
    return dist;
  }
  split_raw(raw, r, dist.mean, dist.std);
  return dist;
}

GaussianSamples predict_weight_samples(const TrainedModel& model,
                                       const SplitBundle& bundle,
                                       const std::vector<SampleRef>& refs,
                                       int n_samples, std::uint64_t seed) {
  if (model.config.kind != ModelKind::kBayesianLastLayer) {
    throw ParameterError("weight sampling requires a Bayesian model");
  }
  if (!model.net || model.history.empty()) {
    throw ParameterError("model is not trained");
  }
  if (n_samples < 1) throw ParameterError("need at least one weight sample");

  auto net = model.net->clone();
  const auto samples = as_stream_samples(bundle, refs);
  const Eigen::Index r = bundle.resource_count();
  rng::PortableRng gen(seed);

  GaussianSamples out;
  out.means.reserve(static_cast<std::size_t>(n_samples));
  out.stds.reserve(static_cast<std::size_t>(n_samples));
  for (int s = 0; s < n_samples; ++s) {
    net->variational()->sample(gen);
    const nn::Mat raw =
        forward_all(*net, bundle, samples, model.config.batch_size);
    nn::Mat mean, std;
    split_raw(raw, r, mean, std);
    out.means.push_back(std::move(mean));
    out.stds.push_back(std::move(std));
  }
  return out;
}

ForecastDistribution moment_match_samples(const GaussianSamples& samples) {
  if (samples.means.empty() || samples.means.size() != samples.stds.size()) {
    throw ParameterError("moment matching needs non-empty gaussian samples");
  }
  const auto s_count = static_cast<Eigen::Index>(samples.means.size());
  const Eigen::Index rows = samples.means.front().rows();
  const Eigen::Index cols = samples.means.front().cols();

  ForecastDistribution dist;
  dist.mean.resize(rows, cols);
  dist.std.resize(rows, cols);
  Eigen::VectorXd mu(s_count), sd(s_count);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      for (Eigen::Index s = 0; s < s_count; ++s) {
        mu(s) = samples.means[static_cast<std::size_t>(s)](i, c);
        sd(s) = samples.stds[static_cast<std::size_t>(s)](i, c);
      }
      const auto mm = moment_match(mu, sd);
      dist.mean(i, c) = mm.mean;
      dist.std(i, c) = std::sqrt(mm.variance);
    }
  }
  return dist;
}

nn::Mat upper_bound(const ForecastDistribution& dist, double confidence,
                    IntervalSide side) {
  const double z = interval_z(confidence, side);
  if (!dist.has_std()) return dist.mean;
  return dist.mean + z * dist.std;
}

// ------------------------------------------------------------ persistence

namespace {

std::string serialize_params(Network& net) {
  std::ostringstream out(std::ios::binary);
  const auto params = net.params();
  const auto count = static_cast<std::uint32_t>(params.size());
  out.write(reinterpret_cast<const char*>(&count), sizeof(count));
  for (const nn::Param* p : params) {
    const auto len = static_cast<std::uint32_t>(p->name.size());
    out.write(reinterpret_cast<const char*>(&len), sizeof(len));
    out.write(p->name.data(), len);
    const std::int64_t rows = p->value.rows();
    const std::int64_t cols = p->value.cols();
    out.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
    out.write(reinterpret_cast<const char*>(&cols), sizeof(cols));
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) {
        const double v = p->value(i, j);
        out.write(reinterpret_cast<const char*>(&v), sizeof(v));
      }
    }
  }
  return out.str();
}

void deserialize_params(Network& net, std::istream& in) {
  auto params = net.params();
  std::uint32_t count = 0;
  in.read(reinterpret_cast<char*>(&count), sizeof(count));
  if (count != params.size()) {
    throw ArtifactError("weight file does not match architecture");
  }
  for (nn::Param* p : params) {
    std::uint32_t len = 0;
    in.read(reinterpret_cast<char*>(&len), sizeof(len));
    std::string name(len, '\0');
    in.read(name.data(), len);
    if (name != p->name) {
      throw ArtifactError("weight name mismatch: expected " + p->name +
                          ", found " + name);
    }
    std::int64_t rows = 0, cols = 0;
    in.read(reinterpret_cast<char*>(&rows), sizeof(rows));
    in.read(reinterpret_cast<char*>(&cols), sizeof(cols));
    if (rows != p->value.rows() || cols != p->value.cols()) {
      throw ArtifactError("weight shape mismatch for " + name);
    }
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) {
        double v = 0.0;
        in.read(reinterpret_cast<char*>(&v), sizeof(v));
        p->value(i, j) = v;
      }
    }
    p->zero_grad();
  }
  if (!in) throw ArtifactError("truncated weight file");
}

}  // namespace

std::string TrainedModel::weights_hash() const {
  if (!net) throw ParameterError("model has no weights");
  return hash::sha256_hex(serialize_params(*net));
}

void save_checkpoint(const TrainedModel& model,
                     const std::filesystem::path& dir,
                     const std::string& config_hash) {
  if (!model.net) throw ParameterError("model has no weights");
  std::filesystem::create_directories(dir);

  {
    std::ofstream out(dir / "config.json");
    if (!out) throw ArtifactError("cannot write config.json");
    out << model.config.to_json() << '\n';
  }
  const std::string blob = serialize_params(*model.net);
  {
    std::ofstream out(dir / "weights.bin", std::ios::binary);
    if (!out) throw ArtifactError("cannot write weights.bin");
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  }
  {
    std::ofstream out(dir / "history.csv");
    if (!out) throw ArtifactError("cannot write history.csv");
    out << "epoch,train_loss,val_loss\n";
    for (std::size_t i = 0; i < model.history.size(); ++i) {
      out << (i + 1) << ',' << csv::format_double(model.history[i].train_loss)
          << ',' << csv::format_double(model.history[i].val_loss) << '\n';
    }
  }
  {
    nlohmann::json meta;
    meta["seed"] = model.seed;
    meta["stop_epoch"] = model.stop_epoch;
    meta["weights_hash"] = hash::sha256_hex(blob);
    meta["config_hash"] = config_hash.empty()
                              ? hash::sha256_hex(model.config.to_json())
                              : config_hash;
    std::ofstream out(dir / "meta.json");
    if (!out) throw ArtifactError("cannot write meta.json");
    out << meta.dump(2) << '\n';
  }
}

TrainedModel load_checkpoint(const std::filesystem::path& dir) {
  TrainedModel model;
  model.config = ModelConfig::from_json_file(dir / "config.json");
  model.net = std::make_unique<Network>(model.config);

  std::ifstream weights(dir / "weights.bin", std::ios::binary);
  if (!weights) {
    throw ArtifactError("missing weights.bin in " + dir.string());
  }
  deserialize_params(*model.net, weights);

  std::ifstream hist(dir / "history.csv");
  if (!hist) throw ArtifactError("missing history.csv in " + dir.string());
  std::string line;
  std::getline(hist, line);  // header
  while (std::getline(hist, line)) {
    if (line.empty()) continue;
    const auto fields = csv::split_line(line);
    model.history.push_back(
        {csv::parse_double(fields.at(1)), csv::parse_double(fields.at(2))});
  }
  if (model.history.empty()) {
    throw ArtifactError("checkpoint has empty history: " + dir.string());
  }

  std::ifstream meta_in(dir / "meta.json");
  if (!meta_in) throw ArtifactError("missing meta.json in " + dir.string());
  nlohmann::json meta;
  meta_in >> meta;
  model.seed = meta.at("seed").get<std::uint64_t>();
  model.stop_epoch = meta.at("stop_epoch").get<int>();
  const auto expected = meta.at("weights_hash").get<std::string>();
  if (model.weights_hash() != expected) {
    throw ArtifactError("weight hash mismatch in " + dir.string());
  }
  return model;
}

void write_predictions_csv(const std::filesystem::path& path,
                           const ForecastDistribution& dist) {
  std::ofstream out(path);
  if (!out) throw ArtifactError("cannot write predictions: " + path.string());
  out << "cluster_id,target_index,resource,mean,std\n";
  for (Eigen::Index i = 0; i < dist.rows(); ++i) {
    for (std::size_t c = 0; c < dist.resources.size(); ++c) {
      out << dist.cluster_id << ','
          << dist.target_index[static_cast<std::size_t>(i)] << ','
          << dist.resources[c] << ','
          << csv::format_double(dist.mean(i, static_cast<Eigen::Index>(c)))
          << ',';
      if (dist.has_std()) {
        out << csv::format_double(dist.std(i, static_cast<Eigen::Index>(c)));
      }
      out << '\n';
    }
  }
}

ForecastDistribution read_predictions_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ArtifactError("cannot open predictions: " + path.string());
  std::string line;
  std::getline(in, line);  // header

  ForecastDistribution dist;
  std::vector<std::int64_t> targets;
  std::vector<std::string> resources;
  std::vector<double> means, stds;
  bool any_std = false, any_missing_std = false;

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = csv::split_line(line);
    if (fields.size() != 5) throw DataError("bad predictions row");
    dist.cluster_id = fields[0];
    const auto target = csv::parse_int(fields[1]);
    if (targets.empty() || targets.back() != target) targets.push_back(target);
    if (std::find(resources.begin(), resources.end(), fields[2]) ==
        resources.end()) {
      resources.push_back(fields[2]);
    }
    means.push_back(csv::parse_double(fields[3]));
    if (fields[4].empty()) {
      any_missing_std = true;
    } else {
      any_std = true;
      stds.push_back(csv::parse_double(fields[4]));
    }
  }
  if (any_std && any_missing_std) {
    throw DataError("predictions mix point and distributional rows");
  }
  const auto r = static_cast<Eigen::Index>(resources.size());
  const auto n = static_cast<Eigen::Index>(targets.size());
  if (n * r != static_cast<Eigen::Index>(means.size())) {
    throw DataError("predictions file is ragged");
  }
  dist.resources = resources;
  dist.target_index = targets;
  dist.mean.resize(n, r);
  if (any_std) dist.std.resize(n, r);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index c = 0; c < r; ++c) {
      dist.mean(i, c) = means[static_cast<std::size_t>(i * r + c)];
      if (any_std) dist.std(i, c) = stds[static_cast<std::size_t>(i * r + c)];
    }
  }
  return dist;
}

}  // namespace cloudcast::models
