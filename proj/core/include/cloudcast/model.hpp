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

#ifndef CLOUDCAST_MODEL_HPP_
#define CLOUDCAST_MODEL_HPP_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cloudcast/gaussian.hpp"
#include "cloudcast/nn.hpp"
#include "cloudcast/windowing.hpp"

namespace cloudcast::models {

enum class ModelKind {
  kPoint,              // LSTM baseline, point estimate, MSE loss
  kDistributional,     // LSTMD, Gaussian output, NLL loss
  kBayesianLastLayer,  // HBNN, variational dense before the Gaussian head
};

ModelKind model_kind_from_name(const std::string& name);
std::string model_kind_name(ModelKind kind);
/// Short label: lstm / lstmd / hbnn. Used in CLI flags and run paths.
std::string model_short_name(ModelKind kind);

struct ConvKernel {
  int filters = 32;
  int width = 3;
};

struct ModelConfig {
  ModelKind kind = ModelKind::kDistributional;
  int conv_blocks = 1;
  std::vector<ConvKernel> conv_kernels = {{32, 3}};
  int lstm_units = 64;
  std::vector<int> dense_stack = {64};
  int output_resources = 1;
  std::string activation = "relu";
  double learning_rate = 1e-3;
  int batch_size = 256;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double weight_decay = 0.0;
  // ELBO scaling: the loss adds kl_weight * KL / n_train per batch.
  double kl_weight = 1.0;
  int epistemic_samples = 100;
  double posterior_rho_init = -5.0;
  IntervalSide interval_side = IntervalSide::kTwoSided;

  void validate() const;  // throws ParameterError
  /// Head width: R for point models, 2R for distributional heads.
  int head_width() const;

  std::string to_json() const;  // stable key order, usable for hashing
  static ModelConfig from_json(const std::string& text);
  static ModelConfig from_json_file(const std::filesystem::path& path);
};

struct TrainOptions {
  int max_epochs = 500;
  int patience = 20;
  std::uint64_t seed = 0;
  std::optional<double> learning_rate_override;

  static TrainOptions from_json_file(const std::filesystem::path& path);
};

/// The assembled network: conv blocks -> LSTM -> dense stack -> head.
/// For the Bayesian variant the last stack layer is variational.
class Network {
 public:
  explicit Network(const ModelConfig& config);

  void init(rng::PortableRng& gen);
  nn::Mat forward(const nn::Seq& input);  // raw head output, batch x head_width
  void backward(const nn::Mat& d_raw);
  void zero_grads();
  std::vector<nn::Param*> params();
  nn::VariationalDense* variational() { return vdense_.get(); }
  const ModelConfig& config() const { return config_; }

  std::unique_ptr<Network> clone() const;

 private:
  ModelConfig config_;
  std::vector<nn::Conv1D> convs_;
  nn::Lstm lstm_;
  std::vector<nn::Dense> denses_;
  std::unique_ptr<nn::VariationalDense> vdense_;
  nn::Dense head_;
};

/// Validates the config and assembles an untrained network.
std::unique_ptr<Network> build_model(const ModelConfig& config);

struct EpochStats {
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct TrainedModel {
  ModelConfig config;
  std::unique_ptr<Network> net;
  std::vector<EpochStats> history;
  int stop_epoch = 0;
  std::uint64_t seed = 0;

  TrainedModel clone() const;
  /// SHA-256 over the serialized parameter values.
  std::string weights_hash() const;
};

/// Trains with Adam and early stopping (best-validation weights restored).
/// Deterministic per seed. Throws TrainingDiverged on non-finite loss.
TrainedModel train(const ModelConfig& config, const data::TrainStream& stream,
                   const TrainOptions& opts);
TrainedModel train(const ModelConfig& config, const data::SplitBundle& bundle,
                   const TrainOptions& opts);

/// Continues optimization of an already trained model (fine-tuning path).
/// History is appended; early stopping applies within the new run.
void continue_training(TrainedModel& model, const data::TrainStream& stream,
                       const TrainOptions& opts);

/// Per-row Gaussian forecast in scaled space. `std` is empty for point
/// models (an additive threshold can be calibrated downstream instead).
struct ForecastDistribution {
  std::string cluster_id;
  std::vector<std::string> resources;
  std::vector<std::int64_t> target_index;
  nn::Mat mean;  // N x R
  nn::Mat std;   // N x R, or 0 x 0 for point models

  bool has_std() const { return std.size() > 0; }
  Eigen::Index rows() const { return mean.rows(); }
};

ForecastDistribution predict_distribution(
    const TrainedModel& model, const data::SplitBundle& bundle,
    const std::vector<data::SampleRef>& refs);

/// Per-weight-sample Gaussians of a Bayesian model, before moment matching.
struct GaussianSamples {
  std::vector<nn::Mat> means;  // S entries, each N x R
  std::vector<nn::Mat> stds;
};

GaussianSamples predict_weight_samples(const TrainedModel& model,
                                       const data::SplitBundle& bundle,
                                       const std::vector<data::SampleRef>& refs,
                                       int n_samples, std::uint64_t seed);

/// Moment-matches equally weighted Gaussian samples into one Gaussian per
/// row: epistemic spread of the means plus mean aleatory variance.
ForecastDistribution moment_match_samples(const GaussianSamples& samples);

/// mean + z(confidence) * std; degenerate (no-std) forecasts return mean.
/// `confidence` is a fraction in (0, 1).
nn::Mat upper_bound(const ForecastDistribution& dist, double confidence,
                    IntervalSide side = IntervalSide::kTwoSided);

/// Checkpoint directory: config.json, weights.bin, history.csv, meta.json.
void save_checkpoint(const TrainedModel& model,
                     const std::filesystem::path& dir,
                     const std::string& config_hash = {});
TrainedModel load_checkpoint(const std::filesystem::path& dir);

/// Predictions CSV: cluster_id,target_index,resource,mean,std
/// (std column left empty for point models).
void write_predictions_csv(const std::filesystem::path& path,
                           const ForecastDistribution& dist);
ForecastDistribution read_predictions_csv(const std::filesystem::path& path);

}  // namespace cloudcast::models

#endif  // CLOUDCAST_MODEL_HPP_
