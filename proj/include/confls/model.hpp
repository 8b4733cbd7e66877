#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "confls/prob_vector.hpp"

namespace confls {

class Dataset;

/// Fully connected layer; `weights` is outputs x inputs, row-major.
struct Layer {
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  std::vector<double> weights;
  std::vector<double> biases;

  bool operator==(const Layer&) const = default;
};

/// Feed-forward softmax classifier [feature_dim -> hidden... -> N]. Hidden
/// layers use ReLU; with no hidden layer this is multinomial logistic
/// regression. The same shape doubles as gradient and velocity buffers.
struct ModelParams {
  std::vector<Layer> layers;

  [[nodiscard]] std::vector<std::size_t> dims() const;
  [[nodiscard]] std::size_t input_dim() const { return layers.front().inputs; }
  [[nodiscard]] std::size_t num_classes() const { return layers.back().outputs; }
  [[nodiscard]] bool all_finite() const;

  bool operator==(const ModelParams&) const = default;
};

/// Weights ~ N(0, 1) / sqrt(fan_in), biases zero. `dims` runs from the
/// feature dimension to the class count; throws std::invalid_argument for
/// fewer than two entries or a zero size.
ModelParams init_model(std::span<const std::size_t> dims, std::uint64_t seed);

/// Same shape as `like`, all zeros.
ModelParams zeros_like(const ModelParams& like);

/// Max-shifted softmax of the final logits. Throws std::invalid_argument on a
/// feature-length mismatch and NumericalError if a logit is not finite.
ProbVector forward(const ModelParams& model, std::span<const double> features);

struct BatchItem {
  std::span<const double> features;
  const ProbVector* target = nullptr;
  bool included = true;
};

struct GradientResult {
  ModelParams grads;
  /// Mean cross-entropy over the included items.
  double loss = 0.0;
  std::size_t included = 0;
};

/// Backpropagated gradient of the mean soft-target cross-entropy over the
/// included items; excluded items are skipped entirely. Accumulation runs
/// in batch order. Throws std::invalid_argument if the batch is empty or
/// nothing is included.
GradientResult gradient(const ModelParams& model, std::span<const BatchItem> batch);

/// Classic momentum: v <- momentum * v + g; w <- w - lr * v.
/// Throws std::invalid_argument on a shape mismatch.
void sgd_step(ModelParams& model, const ModelParams& grads, ModelParams& velocity, double lr, double momentum);

struct Prediction {
  std::string id;
  ProbVector probs;
  std::size_t predicted = 0;
};

/// Forward pass over every sample, in dataset order.
std::vector<Prediction> predict_all(const ModelParams& model, const Dataset& dataset);

// Parameter file: a JSON header line {"format":"confls-mlp","dims":[...],
// "hidden_activation":"relu"} then, per layer, one line of row-major
// weights and one line of biases as space-separated shortest decimals.
std::string serialize_model(const ModelParams& model);
ModelParams parse_model(std::string_view text, const std::string& source = "<memory>");
void save_model(const ModelParams& model, const std::filesystem::path& path);
ModelParams load_model(const std::filesystem::path& path);

}  // namespace confls
