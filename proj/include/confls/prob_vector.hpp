#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace confls {

/// A point on the probability simplex: non-negative entries that sum to one
/// within `kTolerance`. Construction validates; the value is immutable after.
class ProbVector {
 public:
  static constexpr double kTolerance = 1e-9;

  ProbVector() = default;
  /// Throws std::invalid_argument if `values` is empty, has a negative or
  /// non-finite entry, or does not sum to 1 within kTolerance.
  explicit ProbVector(std::vector<double> values);

  static ProbVector uniform(std::size_t n);

  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
  [[nodiscard]] bool empty() const noexcept { return values_.empty(); }
  double operator[](std::size_t i) const { return values_[i]; }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  [[nodiscard]] auto begin() const noexcept { return values_.begin(); }
  [[nodiscard]] auto end() const noexcept { return values_.end(); }

  /// Index of the largest entry; ties go to the lowest index.
  [[nodiscard]] std::size_t argmax() const;
  [[nodiscard]] double max() const;

  bool operator==(const ProbVector&) const = default;

 private:
  std::vector<double> values_;
};

/// Lowest-index argmax over an arbitrary sequence. Requires a non-empty range.
template <typename Range>
std::size_t argmax_lowest(const Range& values) {
  std::size_t best = 0;
  std::size_t i = 0;
  for (const auto& v : values) {
    if (v > values[best]) best = i;
    ++i;
  }
  return best;
}

}  // namespace confls
