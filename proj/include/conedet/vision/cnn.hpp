#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "conedet/vision/colour.hpp"

namespace conedet::vision {

struct ConvSpec {
  int filters = 8;
  int kernel = 5;
  int stride = 1;
};

/// Architecture and training schedule of the crop classifier. Each conv
/// layer is conv(valid) -> ReLU -> max-pool(pool); fc_widths are hidden ReLU
/// layers, followed by a fixed 2-way softmax output.
struct ClassifierConfig {
  int input_size = 32;
  std::vector<ConvSpec> conv_layers{{8, 5, 1}, {16, 3, 1}};
  int pool = 2;
  std::vector<int> fc_widths{64};
  double l1_lambda = 0.0;
  double learning_rate = 0.001;
  int batch_size = 64;
  int iterations = 2000;
  double dropout = 0.0;  // drop probability on hidden fc activations
  std::uint64_t rng_seed = 1;

  void validate() const;
  /// Hex digest of the architecture fields (the parts weights depend on).
  std::string hash() const;
};

nlohmann::json to_json(const ClassifierConfig& c);
ClassifierConfig classifier_config_from_json(const nlohmann::json& j);

struct Tensor {
  std::string name;
  std::vector<int> shape;
  std::vector<double> data;  // row-major
};

/// Parameters in forward order: for each conv layer W[F,C,K,K], b[F]; for
/// each fc layer (hidden then output) W[out,in], b[out].
struct ModelWeights {
  ClassifierConfig config;
  std::string config_hash;
  std::vector<Tensor> layers;

  std::size_t parameter_count() const;
  /// Sum of |w| over weight tensors (biases excluded).
  double l1_norm() const;
  void validate() const;
};

enum class Label : std::uint8_t { not_cone = 0, cone = 1 };

/// Network input: a LAB crop and its label.
struct LabSample {
  LabImage image;
  Label label = Label::not_cone;
};

/// Zero weights for the configured architecture.
ModelWeights zero_weights(const ClassifierConfig& config);
/// He-normal weights, zero biases, seeded.
ModelWeights init_weights(const ClassifierConfig& config, std::uint64_t seed);

/// Cone-class probability. Throws std::invalid_argument when the crop does
/// not match input_size.
double cnn_forward(const ModelWeights& weights, const LabImage& lab);
std::vector<double> cnn_forward_batch(const ModelWeights& weights, std::span<const LabImage> batch);

struct LossAndGradient {
  double data_loss = 0.0;  // mean cross-entropy
  double l1_loss = 0.0;    // lambda * sum |w|
  std::vector<std::vector<double>> gradient;  // per layer, same layout as weights (includes L1 subgradient)
  double total() const { return data_loss + l1_loss; }
};

LossAndGradient loss_and_gradient(const ModelWeights& weights, std::span<const LabSample> batch, double l1_lambda);

/// Plain SGD update w -= lr * grad; grad already contains the L1 term.
void sgd_step(ModelWeights& weights, const std::vector<std::vector<double>>& gradient, double learning_rate);

struct TrainResult {
  ModelWeights weights;
  std::vector<double> loss_trace;  // total loss per iteration
};

/// Mini-batch SGD on cross-entropy + l1_lambda * sum |w|. Throws when the
/// corpus does not contain both classes.
TrainResult cnn_train(const ClassifierConfig& config, std::span<const LabSample> corpus);

nlohmann::json weights_to_json(const ModelWeights& w);
ModelWeights weights_from_json(const nlohmann::json& j);
void save_weights(const std::filesystem::path& path, const ModelWeights& w);
ModelWeights load_weights(const std::filesystem::path& path);

/// Trained network plus an invocation counter (for pipeline accounting).
class CnnClassifier {
 public:
  explicit CnnClassifier(ModelWeights weights) : weights_(std::move(weights)) { weights_.validate(); }

  double score(const LabImage& lab) const;
  double score(const RgbImage& crop) const;
  const ModelWeights& weights() const { return weights_; }
  std::uint64_t invocations() const { return invocations_.load(); }
  void reset_invocations() { invocations_ = 0; }

 private:
  ModelWeights weights_;
  mutable std::atomic<std::uint64_t> invocations_{0};
};

}  // namespace conedet::vision
