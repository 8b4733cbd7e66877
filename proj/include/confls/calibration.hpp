#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "confls/prob_vector.hpp"

namespace confls {

inline constexpr std::size_t kDefaultBins = 15;

/// One confidence bin (lower, upper]. avg_confidence and avg_accuracy are
/// meaningful only when count > 0.
struct BinStats {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t count = 0;
  double avg_confidence = 0.0;
  double avg_accuracy = 0.0;

  bool operator==(const BinStats&) const = default;
};

struct CalibrationReport {
  std::size_t num_bins = 0;
  std::vector<BinStats> bins;
  double ece = 0.0;
  double accuracy = 0.0;
  std::size_t n = 0;
};

/// Fraction of predictions whose lowest-index argmax equals the label.
/// Throws std::invalid_argument on empty or mismatched inputs.
double top1_accuracy(std::span<const ProbVector> predictions, std::span<const std::size_t> labels);

/// 1-based bin for a confidence: bin m covers ((m - 1) / M, m / M] and a
/// confidence of exactly 0 falls in bin 1. Returned 0-based.
std::size_t bin_index(double confidence, std::size_t num_bins);

/// Confidence is the maximum predicted probability; accuracy compares the
/// lowest-index argmax to the label. Throws std::invalid_argument if
/// num_bins < 1 or the inputs are empty or mismatched.
std::vector<BinStats> reliability_bins(std::span<const ProbVector> predictions, std::span<const std::size_t> labels,
                                       std::size_t num_bins);

/// sum over non-empty bins of (count / n) * |avg_accuracy - avg_confidence|.
double ece_from_bins(std::span<const BinStats> bins);

double ece(std::span<const ProbVector> predictions, std::span<const std::size_t> labels, std::size_t num_bins);

CalibrationReport evaluate_calibration(std::span<const ProbVector> predictions, std::span<const std::size_t> labels,
                                       std::size_t num_bins = kDefaultBins);

/// Comma-separated reliability rows, header first:
///   lower,upper,count,avg_confidence,avg_accuracy
/// Empty bins leave the last two fields blank.
std::string reliability_csv(std::span<const BinStats> bins);
std::vector<BinStats> parse_reliability_csv(std::string_view text, const std::string& source = "<memory>");
void reliability_export(const CalibrationReport& report, const std::filesystem::path& path);

/// The report as one JSON object (n, num_bins, accuracy, ece, bins).
std::string report_json(const CalibrationReport& report);

}  // namespace confls
