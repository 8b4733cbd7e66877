#include "confls/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

#include "confls/errors.hpp"
#include "confls/random.hpp"
#include "confls/text_io.hpp"

namespace confls {

using ordered_json = nlohmann::ordered_json;

Dataset::Dataset(std::size_t num_classes, std::size_t feature_dim, std::vector<AnnotatedSample> samples)
    : num_classes_(num_classes), feature_dim_(feature_dim), samples_(std::move(samples)) {
  if (num_classes_ == 0) throw DataError("dataset needs at least one class");
  if (feature_dim_ == 0) throw DataError("dataset needs a positive feature dimension");
  std::unordered_set<std::string> seen;
  for (const auto& s : samples_) {
    if (s.features.size() != feature_dim_) {
      throw DataError("sample '" + s.id + "' has " + std::to_string(s.features.size()) +
                      " features, expected " + std::to_string(feature_dim_));
    }
    if (s.annotation_counts.size() != num_classes_) {
      throw DataError("sample '" + s.id + "' has " + std::to_string(s.annotation_counts.size()) +
                      " annotation counts, expected " + std::to_string(num_classes_));
    }
    if (std::all_of(s.annotation_counts.begin(), s.annotation_counts.end(),
                    [](std::uint32_t c) { return c == 0; })) {
      throw DataError("sample '" + s.id + "': sample has no annotations");
    }
    if (!seen.insert(s.id).second) throw DataError("duplicate sample id '" + s.id + "'");
  }
}

ProbVector annotation_distribution(const AnnotatedSample& sample) {
  double total = 0.0;
  for (auto c : sample.annotation_counts) total += c;
  std::vector<double> dist;
  dist.reserve(sample.annotation_counts.size());
  for (auto c : sample.annotation_counts) dist.push_back(static_cast<double>(c) / total);
  return ProbVector(std::move(dist));
}

std::size_t modal_label(const AnnotatedSample& sample) {
  return argmax_lowest(sample.annotation_counts);
}

std::vector<std::size_t> modal_labels(const Dataset& dataset) {
  std::vector<std::size_t> labels;
  labels.reserve(dataset.size());
  for (const auto& s : dataset.samples()) labels.push_back(modal_label(s));
  return labels;
}

// ---------------------------------------------------------------------------
// Record files
// ---------------------------------------------------------------------------

std::string serialize_dataset(const Dataset& dataset) {
  std::string out;
  ordered_json header;
  header["num_classes"] = dataset.num_classes();
  header["feature_dim"] = dataset.feature_dim();
  out += header.dump();
  out += '\n';
  for (const auto& s : dataset.samples()) {
    ordered_json record;
    record["id"] = s.id;
    record["features"] = s.features;
    record["annotation_counts"] = s.annotation_counts;
    out += record.dump();
    out += '\n';
  }
  return out;
}

namespace {

std::size_t positive_size(const ordered_json& value, const char* key) {
  const auto& field = value.at(key);
  if (!field.is_number_integer() || field.get<long long>() <= 0) {
    throw std::invalid_argument(std::string(key) + " must be a positive integer");
  }
  return field.get<std::size_t>();
}

AnnotatedSample parse_record(const ordered_json& record) {
  if (!record.is_object()) throw std::invalid_argument("record is not an object");
  AnnotatedSample sample;
  sample.id = record.at("id").get<std::string>();
  for (const auto& f : record.at("features")) {
    if (!f.is_number()) throw std::invalid_argument("feature is not a number");
    sample.features.push_back(f.get<double>());
  }
  for (const auto& c : record.at("annotation_counts")) {
    if (!c.is_number_integer() || c.get<long long>() < 0) {
      throw std::invalid_argument("annotation count must be a non-negative integer");
    }
    sample.annotation_counts.push_back(c.get<std::uint32_t>());
  }
  return sample;
}

}  // namespace

Dataset parse_dataset(std::string_view text, const std::string& source) {
  const auto lines = split_lines(text);
  std::size_t first = 0;
  while (first < lines.size() && lines[first].empty()) ++first;
  if (first == lines.size()) throw DataError(source + ": empty file");

  auto fail = [&](std::size_t index, const std::string& what) -> DataError {
    return DataError(source + ":" + std::to_string(index + 1) + ": " + what);
  };

  std::size_t num_classes = 0;
  std::size_t feature_dim = 0;
  try {
    const auto header = ordered_json::parse(lines[first]);
    num_classes = positive_size(header, "num_classes");
    feature_dim = positive_size(header, "feature_dim");
  } catch (const std::exception& e) {
    throw fail(first, std::string("bad header: ") + e.what());
  }

  std::vector<AnnotatedSample> samples;
  std::unordered_set<std::string> seen;
  for (std::size_t i = first + 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    AnnotatedSample sample;
    try {
      sample = parse_record(ordered_json::parse(lines[i]));
    } catch (const std::exception& e) {
      throw fail(i, std::string("malformed record: ") + e.what());
    }
    if (sample.features.size() != feature_dim) {
      throw fail(i, "sample '" + sample.id + "' has " + std::to_string(sample.features.size()) +
                        " features, header declares feature_dim " + std::to_string(feature_dim));
    }
    if (sample.annotation_counts.size() != num_classes) {
      throw fail(i, "sample '" + sample.id + "' has " +
                        std::to_string(sample.annotation_counts.size()) +
                        " annotation counts, header declares num_classes " +
                        std::to_string(num_classes));
    }
    if (std::all_of(sample.annotation_counts.begin(), sample.annotation_counts.end(),
                    [](std::uint32_t c) { return c == 0; })) {
      throw fail(i, "sample '" + sample.id + "': sample has no annotations");
    }
    if (!seen.insert(sample.id).second) throw fail(i, "duplicate sample id '" + sample.id + "'");
    samples.push_back(std::move(sample));
  }
  return Dataset(num_classes, feature_dim, std::move(samples));
}

Dataset load_dataset(const std::filesystem::path& path) {
  return parse_dataset(read_file(path), path.string());
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  write_file(path, serialize_dataset(dataset));
}

// ---------------------------------------------------------------------------
// Synthetic generation
// ---------------------------------------------------------------------------

namespace {

double distance(std::span<const double> a, std::span<const double> b) {
  double sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sq += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(sq);
}

}  // namespace

Dataset generate_synthetic(const SyntheticConfig& config) {
  if (config.num_classes < 2) throw std::invalid_argument("synthetic data needs at least 2 classes");
  if (config.rater_count < 1) throw std::invalid_argument("synthetic data needs at least 1 rater");
  if (config.feature_dim < 1) throw std::invalid_argument("feature_dim must be positive");
  if (config.samples_per_class < 1) throw std::invalid_argument("samples_per_class must be positive");
  if (!(config.noise >= 0.0 && config.noise <= 1.0)) {
    throw std::invalid_argument("noise must lie in [0, 1]");
  }

  const std::size_t n_classes = config.num_classes;
  const std::size_t dim = config.feature_dim;

  Rng centroid_rng(derive_seed(config.seed, 1));
  std::vector<std::vector<double>> centroids(n_classes, std::vector<double>(dim));
  for (auto& c : centroids) {
    for (auto& x : c) x = centroid_rng.normal(0.0, config.centroid_spread);
  }

  Rng rng(derive_seed(config.seed, 2));
  std::vector<AnnotatedSample> samples;
  samples.reserve(n_classes * config.samples_per_class);
  std::vector<double> confusion(n_classes);
  char id_buf[32];
  for (std::size_t cls = 0; cls < n_classes; ++cls) {
    for (std::size_t k = 0; k < config.samples_per_class; ++k) {
      AnnotatedSample s;
      std::snprintf(id_buf, sizeof id_buf, "s%06zu", samples.size());
      s.id = id_buf;
      s.features.resize(dim);
      for (std::size_t d = 0; d < dim; ++d) {
        s.features[d] = rng.normal(centroids[cls][d], config.cluster_stddev);
      }
      for (std::size_t j = 0; j < n_classes; ++j) {
        // The floor keeps the weight finite when a sample sits on a centroid.
        confusion[j] = j == cls ? 0.0 : 1.0 / std::max(distance(s.features, centroids[j]), 1e-6);
      }
      s.annotation_counts.assign(n_classes, 0);
      for (std::size_t r = 0; r < config.rater_count; ++r) {
        const bool faithful = rng.uniform() >= config.noise;
        const std::size_t vote = faithful ? cls : rng.discrete(confusion);
        ++s.annotation_counts[vote];
      }
      samples.push_back(std::move(s));
    }
  }
  return Dataset(n_classes, dim, std::move(samples));
}

std::pair<Dataset, Dataset> split(const Dataset& dataset, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("train_fraction must lie in (0, 1)");
  }
  const std::size_t n = dataset.size();
  // The 1e-9 guard keeps e.g. (1 - 0.8) * 10 = 1.9999999999999996 from flooring to 1.
  const auto raw_test = static_cast<std::size_t>(std::floor((1.0 - train_fraction) * static_cast<double>(n) + 1e-9));
  const std::size_t test_size = std::max<std::size_t>(raw_test, 1);
  if (test_size >= n) {
    throw std::invalid_argument("train_fraction " + format_double(train_fraction) + " leaves an empty part for " +
                                std::to_string(n) + " samples");
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(derive_seed(seed, 3));
  rng.shuffle(order);

  const std::size_t train_size = n - test_size;
  std::vector<AnnotatedSample> train, test;
  train.reserve(train_size);
  test.reserve(test_size);
  for (std::size_t i = 0; i < n; ++i) {
    (i < train_size ? train : test).push_back(dataset[order[i]]);
  }
  return {Dataset(dataset.num_classes(), dataset.feature_dim(), std::move(train)),
          Dataset(dataset.num_classes(), dataset.feature_dim(), std::move(test))};
}

}  // namespace confls
