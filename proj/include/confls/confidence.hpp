#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "confls/dataset.hpp"
#include "confls/model.hpp"
#include "confls/prob_vector.hpp"

namespace confls {

enum class ConfidenceKind { model, human };

std::string_view to_string(ConfidenceKind kind);
/// Accepts "model" or "human"; throws std::invalid_argument otherwise.
ConfidenceKind parse_confidence_kind(std::string_view text);

/// Per-sample confidence: the per-class vector (baseline softmax output or
/// rater distribution) and the scalar used for curriculum ranking (M_c, the
/// baseline probability at the modal label, or sigma, the spread of the
/// rater distribution).
struct ConfidenceEntry {
  ProbVector vector;
  double scalar = 0.0;

  bool operator==(const ConfidenceEntry&) const = default;
};

/// Entries keyed by sample id, kept in insertion order so saved tables are
/// byte-stable.
class ConfidenceTable {
 public:
  ConfidenceTable(ConfidenceKind kind, std::size_t num_classes);

  [[nodiscard]] ConfidenceKind kind() const noexcept { return kind_; }
  [[nodiscard]] std::size_t num_classes() const noexcept { return num_classes_; }
  [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }

  /// Throws DataError on a duplicate id, a vector of the wrong length, or a
  /// scalar outside the kind's range.
  void insert(std::string id, ConfidenceEntry entry);
  [[nodiscard]] bool contains(const std::string& id) const { return index_.contains(id); }
  /// Throws DataError naming the id if it is absent.
  [[nodiscard]] const ConfidenceEntry& at(const std::string& id) const;

  [[nodiscard]] const std::vector<std::pair<std::string, ConfidenceEntry>>& entries() const noexcept {
    return entries_;
  }

  bool operator==(const ConfidenceTable& other) const {
    return kind_ == other.kind_ && num_classes_ == other.num_classes_ && entries_ == other.entries_;
  }

 private:
  ConfidenceKind kind_;
  std::size_t num_classes_;
  std::vector<std::pair<std::string, ConfidenceEntry>> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Population standard deviation (divide by N) of the entries of `dist`.
/// Zero for the uniform distribution, sqrt(N - 1) / N for a one-hot one.
double human_confidence_scalar(const ProbVector& dist);

/// The rater relative-frequency vector; same as annotation_distribution.
ProbVector human_confidence_vector(const AnnotatedSample& sample);

ConfidenceTable human_confidence_table(const Dataset& dataset);

/// Runs a trained baseline over `dataset`. Vector = softmax output; scalar =
/// its entry at the sample's modal label. Throws DataError on a
/// feature-dimension or class-count mismatch.
ConfidenceTable precompute_model_confidence(const ModelParams& model, const Dataset& dataset);

/// Looks up every dataset sample in `table`, in dataset order. Extra table
/// entries are ignored. Throws DataError naming the first missing id or on
/// a class-count mismatch.
std::vector<const ConfidenceEntry*> join(const ConfidenceTable& table, const Dataset& dataset);

// Sidecar file: {"kind": "model"|"human", "num_classes": N} then one
// {"id": "...", "vector": [...], "scalar": x} line per sample.
std::string serialize_table(const ConfidenceTable& table);
ConfidenceTable parse_table(std::string_view text, const std::string& source = "<memory>");
void save_table(const ConfidenceTable& table, const std::filesystem::path& path);
ConfidenceTable load_table(const std::filesystem::path& path);

}  // namespace confls
