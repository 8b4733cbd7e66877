#include "confls/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "confls/errors.hpp"
#include "confls/text_io.hpp"

namespace confls {

namespace {

void check_inputs(std::span<const ProbVector> predictions, std::span<const std::size_t> labels) {
  if (predictions.empty()) throw std::invalid_argument("no predictions to evaluate");
  if (predictions.size() != labels.size()) {
    throw std::invalid_argument(std::to_string(predictions.size()) + " predictions but " +
                                std::to_string(labels.size()) + " labels");
  }
}

}  // namespace

double top1_accuracy(std::span<const ProbVector> predictions, std::span<const std::size_t> labels) {
  check_inputs(predictions, labels);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i].argmax() == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(predictions.size());
}

std::size_t bin_index(double confidence, std::size_t num_bins) {
  const auto m = static_cast<double>(num_bins);
  auto upper_edge = [&](std::size_t k) { return static_cast<double>(k) / m; };
  // ceil(c * M) is right except where rounding in the product disagrees with
  // the k / M edges; nudge until the edges agree.
  auto k = static_cast<std::size_t>(std::max(std::ceil(confidence * m), 1.0));
  k = std::min(k, num_bins);
  while (k > 1 && confidence <= upper_edge(k - 1)) --k;
  while (k < num_bins && confidence > upper_edge(k)) ++k;
  return k - 1;
}

std::vector<BinStats> reliability_bins(std::span<const ProbVector> predictions, std::span<const std::size_t> labels,
                                       std::size_t num_bins) {
  if (num_bins < 1) throw std::invalid_argument("need at least one bin");
  check_inputs(predictions, labels);

  const auto m = static_cast<double>(num_bins);
  std::vector<BinStats> bins(num_bins);
  std::vector<double> conf_sum(num_bins, 0.0);
  std::vector<std::size_t> correct(num_bins, 0);
  for (std::size_t b = 0; b < num_bins; ++b) {
    bins[b].lower = static_cast<double>(b) / m;
    bins[b].upper = static_cast<double>(b + 1) / m;
  }
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double confidence = predictions[i].max();
    const std::size_t b = bin_index(confidence, num_bins);
    ++bins[b].count;
    conf_sum[b] += confidence;
    if (predictions[i].argmax() == labels[i]) ++correct[b];
  }
  for (std::size_t b = 0; b < num_bins; ++b) {
    if (bins[b].count == 0) continue;
    const auto count = static_cast<double>(bins[b].count);
    bins[b].avg_confidence = conf_sum[b] / count;
    bins[b].avg_accuracy = static_cast<double>(correct[b]) / count;
  }
  return bins;
}

double ece_from_bins(std::span<const BinStats> bins) {
  std::size_t n = 0;
  for (const auto& b : bins) n += b.count;
  if (n == 0) return 0.0;
  double total = 0.0;
  for (const auto& b : bins) {
    if (b.count == 0) continue;
    total += static_cast<double>(b.count) / static_cast<double>(n) * std::abs(b.avg_accuracy - b.avg_confidence);
  }
  return total;
}

double ece(std::span<const ProbVector> predictions, std::span<const std::size_t> labels, std::size_t num_bins) {
  return ece_from_bins(reliability_bins(predictions, labels, num_bins));
}

CalibrationReport evaluate_calibration(std::span<const ProbVector> predictions, std::span<const std::size_t> labels,
                                       std::size_t num_bins) {
  CalibrationReport report;
  report.num_bins = num_bins;
  report.bins = reliability_bins(predictions, labels, num_bins);
  report.ece = ece_from_bins(report.bins);
  report.accuracy = top1_accuracy(predictions, labels);
  report.n = predictions.size();
  return report;
}

std::string reliability_csv(std::span<const BinStats> bins) {
  std::string out = "lower,upper,count,avg_confidence,avg_accuracy\n";
  for (const auto& b : bins) {
    out += format_double(b.lower) + ',' + format_double(b.upper) + ',' + std::to_string(b.count) + ',';
    if (b.count > 0) out += format_double(b.avg_confidence) + ',' + format_double(b.avg_accuracy);
    else out += ',';
    out += '\n';
  }
  return out;
}

std::vector<BinStats> parse_reliability_csv(std::string_view text, const std::string& source) {
  const auto lines = split_lines(text);
  if (lines.empty() || lines[0] != "lower,upper,count,avg_confidence,avg_accuracy") {
    throw DataError(source + ":1: missing reliability header");
  }
  std::vector<BinStats> bins;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      const auto comma = lines[i].find(',', start);
      fields.push_back(lines[i].substr(start, comma == std::string::npos ? std::string::npos : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    auto fail = [&](const std::string& what) {
      return DataError(source + ":" + std::to_string(i + 1) + ": " + what);
    };
    if (fields.size() != 5) throw fail("expected 5 fields, got " + std::to_string(fields.size()));
    try {
      BinStats b;
      b.lower = parse_double(fields[0]);
      b.upper = parse_double(fields[1]);
      b.count = static_cast<std::size_t>(std::stoull(fields[2]));
      if (b.count > 0) {
        b.avg_confidence = parse_double(fields[3]);
        b.avg_accuracy = parse_double(fields[4]);
      } else if (!fields[3].empty() || !fields[4].empty()) {
        throw DataError("empty bin with non-empty averages");
      }
      bins.push_back(b);
    } catch (const std::exception& e) {
      throw fail(e.what());
    }
  }
  return bins;
}

void reliability_export(const CalibrationReport& report, const std::filesystem::path& path) {
  write_file(path, reliability_csv(report.bins));
}

std::string report_json(const CalibrationReport& report) {
  nlohmann::ordered_json j;
  j["n"] = report.n;
  j["num_bins"] = report.num_bins;
  j["accuracy"] = report.accuracy;
  j["ece"] = report.ece;
  auto bins = nlohmann::ordered_json::array();
  for (const auto& b : report.bins) {
    nlohmann::ordered_json row;
    row["lower"] = b.lower;
    row["upper"] = b.upper;
    row["count"] = b.count;
    row["avg_confidence"] = b.count > 0 ? nlohmann::ordered_json(b.avg_confidence) : nlohmann::ordered_json();
    row["avg_accuracy"] = b.count > 0 ? nlohmann::ordered_json(b.avg_accuracy) : nlohmann::ordered_json();
    bins.push_back(std::move(row));
  }
  j["bins"] = std::move(bins);
  return j.dump();
}

}  // namespace confls
