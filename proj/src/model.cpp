#include "confls/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "confls/dataset.hpp"
#include "confls/errors.hpp"
#include "confls/random.hpp"
#include "confls/smoothing.hpp"
#include "confls/text_io.hpp"

namespace confls {

std::vector<std::size_t> ModelParams::dims() const {
  std::vector<std::size_t> d;
  if (layers.empty()) return d;
  d.push_back(layers.front().inputs);
  for (const auto& layer : layers) d.push_back(layer.outputs);
  return d;
}

bool ModelParams::all_finite() const {
  for (const auto& layer : layers) {
    for (double w : layer.weights) {
      if (!std::isfinite(w)) return false;
    }
    for (double b : layer.biases) {
      if (!std::isfinite(b)) return false;
    }
  }
  return true;
}

ModelParams init_model(std::span<const std::size_t> dims, std::uint64_t seed) {
  if (dims.size() < 2) throw std::invalid_argument("model needs at least input and output sizes");
  if (std::any_of(dims.begin(), dims.end(), [](std::size_t d) { return d == 0; })) {
    throw std::invalid_argument("layer sizes must be positive");
  }
  Rng rng(derive_seed(seed, 11));
  ModelParams model;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    Layer layer;
    layer.inputs = dims[l];
    layer.outputs = dims[l + 1];
    layer.weights.resize(layer.inputs * layer.outputs);
    layer.biases.assign(layer.outputs, 0.0);
    const double scale = 1.0 / std::sqrt(static_cast<double>(layer.inputs));
    for (double& w : layer.weights) w = rng.normal() * scale;
    model.layers.push_back(std::move(layer));
  }
  return model;
}

ModelParams zeros_like(const ModelParams& like) {
  ModelParams z = like;
  for (auto& layer : z.layers) {
    std::fill(layer.weights.begin(), layer.weights.end(), 0.0);
    std::fill(layer.biases.begin(), layer.biases.end(), 0.0);
  }
  return z;
}

namespace {

void check_input(const ModelParams& model, std::span<const double> features) {
  if (model.layers.empty()) throw std::invalid_argument("model has no layers");
  if (features.size() != model.input_dim()) {
    throw std::invalid_argument("model expects " + std::to_string(model.input_dim()) + " features, got " +
                                std::to_string(features.size()));
  }
}

// activations[0] is the input; activations[l + 1] is the output of layer l
// (post-ReLU for hidden layers, raw logits for the last one).
void run_layers(const ModelParams& model, std::span<const double> features,
                std::vector<std::vector<double>>& activations) {
  activations.resize(model.layers.size() + 1);
  activations[0].assign(features.begin(), features.end());
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const Layer& layer = model.layers[l];
    const auto& in = activations[l];
    auto& out = activations[l + 1];
    out.assign(layer.outputs, 0.0);
    const bool hidden = l + 1 < model.layers.size();
    for (std::size_t o = 0; o < layer.outputs; ++o) {
      double z = layer.biases[o];
      const double* row = layer.weights.data() + o * layer.inputs;
      for (std::size_t i = 0; i < layer.inputs; ++i) z += row[i] * in[i];
      out[o] = hidden ? std::max(z, 0.0) : z;
    }
  }
}

ProbVector softmax(std::span<const double> logits) {
  for (double z : logits) {
    if (!std::isfinite(z)) throw NumericalError("non-finite logit in forward pass");
  }
  const double shift = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - shift);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return ProbVector(std::move(p));
}

void check_same_shape(const ModelParams& a, const ModelParams& b, const char* what) {
  bool same = a.layers.size() == b.layers.size();
  for (std::size_t l = 0; same && l < a.layers.size(); ++l) {
    same = a.layers[l].inputs == b.layers[l].inputs && a.layers[l].outputs == b.layers[l].outputs &&
           a.layers[l].weights.size() == b.layers[l].weights.size() &&
           a.layers[l].biases.size() == b.layers[l].biases.size();
  }
  if (!same) throw std::invalid_argument(std::string("shape mismatch: ") + what);
}

}  // namespace

ProbVector forward(const ModelParams& model, std::span<const double> features) {
  check_input(model, features);
  std::vector<std::vector<double>> activations;
  run_layers(model, features, activations);
  return softmax(activations.back());
}

GradientResult gradient(const ModelParams& model, std::span<const BatchItem> batch) {
  if (batch.empty()) throw std::invalid_argument("gradient of an empty batch");
  GradientResult result{zeros_like(model), 0.0, 0};
  std::vector<std::vector<double>> activations;
  std::vector<double> delta, prev_delta;

  for (const auto& item : batch) {
    if (!item.included) continue;
    check_input(model, item.features);
    if (item.target == nullptr || item.target->size() != model.num_classes()) {
      throw std::invalid_argument("batch target does not match the model's class count");
    }
    run_layers(model, item.features, activations);
    const ProbVector probs = softmax(activations.back());
    result.loss += cross_entropy(*item.target, probs);
    ++result.included;

    // Softmax + cross-entropy: d loss / d logits = probs - target.
    delta.resize(probs.size());
    for (std::size_t k = 0; k < probs.size(); ++k) delta[k] = probs[k] - (*item.target)[k];

    for (std::size_t l = model.layers.size(); l-- > 0;) {
      const Layer& layer = model.layers[l];
      Layer& g = result.grads.layers[l];
      const auto& in = activations[l];
      for (std::size_t o = 0; o < layer.outputs; ++o) {
        const double d = delta[o];
        g.biases[o] += d;
        double* grow = g.weights.data() + o * layer.inputs;
        for (std::size_t i = 0; i < layer.inputs; ++i) grow[i] += d * in[i];
      }
      if (l == 0) break;
      prev_delta.assign(layer.inputs, 0.0);
      for (std::size_t o = 0; o < layer.outputs; ++o) {
        const double* row = layer.weights.data() + o * layer.inputs;
        for (std::size_t i = 0; i < layer.inputs; ++i) prev_delta[i] += row[i] * delta[o];
      }
      // ReLU derivative: the stored activation is positive iff z > 0.
      for (std::size_t i = 0; i < layer.inputs; ++i) {
        if (!(in[i] > 0.0)) prev_delta[i] = 0.0;
      }
      delta.swap(prev_delta);
    }
  }

  if (result.included == 0) throw std::invalid_argument("every sample in the batch is excluded");
  const double scale = 1.0 / static_cast<double>(result.included);
  for (auto& layer : result.grads.layers) {
    for (double& w : layer.weights) w *= scale;
    for (double& b : layer.biases) b *= scale;
  }
  result.loss *= scale;
  return result;
}

void sgd_step(ModelParams& model, const ModelParams& grads, ModelParams& velocity, double lr, double momentum) {
  check_same_shape(model, grads, "model vs gradients");
  check_same_shape(model, velocity, "model vs velocity");
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    auto update = [&](std::vector<double>& w, const std::vector<double>& g, std::vector<double>& v) {
      for (std::size_t i = 0; i < w.size(); ++i) {
        v[i] = momentum * v[i] + g[i];
        w[i] -= lr * v[i];
      }
    };
    update(model.layers[l].weights, grads.layers[l].weights, velocity.layers[l].weights);
    update(model.layers[l].biases, grads.layers[l].biases, velocity.layers[l].biases);
  }
}

std::vector<Prediction> predict_all(const ModelParams& model, const Dataset& dataset) {
  if (model.layers.empty() || dataset.feature_dim() != model.input_dim()) {
    throw DataError("model expects " + std::to_string(model.layers.empty() ? 0 : model.input_dim()) +
                    " features but the dataset has " + std::to_string(dataset.feature_dim()));
  }
  if (dataset.num_classes() != model.num_classes()) {
    throw DataError("model predicts " + std::to_string(model.num_classes()) + " classes but the dataset has " +
                    std::to_string(dataset.num_classes()));
  }
  std::vector<Prediction> out;
  out.reserve(dataset.size());
  for (const auto& s : dataset.samples()) {
    ProbVector probs = forward(model, s.features);
    const std::size_t predicted = probs.argmax();
    out.push_back({s.id, std::move(probs), predicted});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Parameter file
// ---------------------------------------------------------------------------

namespace {

void append_row(std::string& out, const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ' ';
    out += format_double(values[i]);
  }
  out += '\n';
}

std::vector<double> parse_row(const std::string& line) {
  std::vector<double> values;
  std::istringstream in(line);
  std::string token;
  while (in >> token) values.push_back(parse_double(token));
  return values;
}

}  // namespace

std::string serialize_model(const ModelParams& model) {
  nlohmann::ordered_json header;
  header["format"] = "confls-mlp";
  header["dims"] = model.dims();
  header["hidden_activation"] = "relu";
  std::string out = header.dump();
  out += '\n';
  for (const auto& layer : model.layers) {
    append_row(out, layer.weights);
    append_row(out, layer.biases);
  }
  return out;
}

ModelParams parse_model(std::string_view text, const std::string& source) {
  const auto lines = split_lines(text);
  if (lines.empty()) throw DataError(source + ": empty model file");
  std::vector<std::size_t> dims;
  try {
    const auto header = nlohmann::json::parse(lines[0]);
    if (header.at("format").get<std::string>() != "confls-mlp") throw std::invalid_argument("unknown format");
    dims = header.at("dims").get<std::vector<std::size_t>>();
  } catch (const std::exception& e) {
    throw DataError(source + ":1: bad model header: " + e.what());
  }
  if (dims.size() < 2 || std::any_of(dims.begin(), dims.end(), [](std::size_t d) { return d == 0; })) {
    throw DataError(source + ":1: invalid layer sizes");
  }
  const std::size_t n_layers = dims.size() - 1;
  if (lines.size() < 1 + 2 * n_layers) {
    throw DataError(source + ": truncated model file, expected " + std::to_string(1 + 2 * n_layers) + " lines");
  }
  ModelParams model;
  for (std::size_t l = 0; l < n_layers; ++l) {
    Layer layer;
    layer.inputs = dims[l];
    layer.outputs = dims[l + 1];
    const std::size_t wline = 1 + 2 * l;
    try {
      layer.weights = parse_row(lines[wline]);
      layer.biases = parse_row(lines[wline + 1]);
    } catch (const DataError& e) {
      throw DataError(source + ":" + std::to_string(wline + 1) + ": " + e.what());
    }
    if (layer.weights.size() != layer.inputs * layer.outputs || layer.biases.size() != layer.outputs) {
      throw DataError(source + ":" + std::to_string(wline + 1) + ": layer " + std::to_string(l) +
                      " has the wrong number of parameters");
    }
    model.layers.push_back(std::move(layer));
  }
  return model;
}

void save_model(const ModelParams& model, const std::filesystem::path& path) {
  write_file(path, serialize_model(model));
}

ModelParams load_model(const std::filesystem::path& path) {
  return parse_model(read_file(path), path.string());
}

}  // namespace confls
