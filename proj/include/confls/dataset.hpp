#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "confls/prob_vector.hpp"

namespace confls {

/// One item with its feature vector and the raw per-class rater votes.
struct AnnotatedSample {
  std::string id;
  std::vector<double> features;
  std::vector<std::uint32_t> annotation_counts;

  bool operator==(const AnnotatedSample&) const = default;
};

/// An ordered, validated collection of samples sharing one class count and
/// feature dimension. Ids are unique. Immutable once constructed.
class Dataset {
 public:
  /// Throws DataError if any sample breaks the shared-shape, non-empty
  /// annotation, or unique-id invariants.
  Dataset(std::size_t num_classes, std::size_t feature_dim, std::vector<AnnotatedSample> samples);

  [[nodiscard]] std::size_t num_classes() const noexcept { return num_classes_; }
  [[nodiscard]] std::size_t feature_dim() const noexcept { return feature_dim_; }
  [[nodiscard]] std::size_t size() const noexcept { return samples_.size(); }
  [[nodiscard]] const std::vector<AnnotatedSample>& samples() const noexcept { return samples_; }
  const AnnotatedSample& operator[](std::size_t i) const { return samples_[i]; }

  bool operator==(const Dataset&) const = default;

 private:
  std::size_t num_classes_;
  std::size_t feature_dim_;
  std::vector<AnnotatedSample> samples_;
};

/// Relative frequency of rater votes per class.
ProbVector annotation_distribution(const AnnotatedSample& sample);

/// Class with the most votes; ties go to the lowest class index.
std::size_t modal_label(const AnnotatedSample& sample);

std::vector<std::size_t> modal_labels(const Dataset& dataset);

// ---------------------------------------------------------------------------
// Line-delimited record files.
//
//   {"num_classes": N, "feature_dim": d}
//   {"id": "...", "features": [...], "annotation_counts": [...]}
//   ...
// ---------------------------------------------------------------------------

std::string serialize_dataset(const Dataset& dataset);
/// `source` names the input in error messages ("<source>:<line>: ...").
Dataset parse_dataset(std::string_view text, const std::string& source = "<memory>");

Dataset load_dataset(const std::filesystem::path& path);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Synthetic generation
// ---------------------------------------------------------------------------

struct SyntheticConfig {
  std::size_t num_classes = 3;
  std::size_t samples_per_class = 200;
  std::size_t feature_dim = 2;
  std::size_t rater_count = 10;
  /// Probability that a rater votes for some class other than the true one.
  double noise = 0.2;
  std::uint64_t seed = 0;
  /// Standard deviation of the centroid coordinates around the origin.
  double centroid_spread = 1.5;
  /// Isotropic standard deviation of each class cluster.
  double cluster_stddev = 1.0;
};

/// Gaussian clusters around seeded centroids with simulated rater votes.
/// Off-class votes pick class j with weight proportional to the inverse
/// distance from the sample to centroid j, so samples near other clusters
/// collect more confusable votes. Throws std::invalid_argument on bad config.
Dataset generate_synthetic(const SyntheticConfig& config);

/// Deterministic shuffle then partition into (train, test). The test part
/// gets floor((1 - train_fraction) * n) samples, at least one; the train
/// part gets the remainder. Throws std::invalid_argument if either part
/// would be empty.
std::pair<Dataset, Dataset> split(const Dataset& dataset, double train_fraction, std::uint64_t seed);

}  // namespace confls
