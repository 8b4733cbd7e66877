#include "confls/curriculum.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace confls {

double initial_threshold(std::span<const double> scores, double r) {
  if (scores.empty()) throw std::invalid_argument("initial_threshold: no scores");
  if (!(r > 0.0 && r <= 1.0)) throw std::invalid_argument("easy ratio r must lie in (0, 1]");
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const auto n = static_cast<double>(sorted.size());
  // r * n can land a hair above an integer (0.28 * 25 = 7.000000000000001).
  auto rank = static_cast<std::size_t>(std::ceil(r * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

double update_factor(double mu0, int end_epoch) {
  if (end_epoch < 1) throw std::invalid_argument("ending epoch must be at least 1");
  return mu0 / static_cast<double>(end_epoch);
}

CurriculumSchedule::CurriculumSchedule(double mu0, int end_epoch, ConfidenceKind criterion)
    : mu0_(mu0), beta_(update_factor(mu0, end_epoch)), end_epoch_(end_epoch), criterion_(criterion), mu_(mu0) {}

CurriculumSchedule::CurriculumSchedule(std::span<const double> scores, double r, int end_epoch,
                                       ConfidenceKind criterion)
    : CurriculumSchedule(initial_threshold(scores, r), end_epoch, criterion) {}

void CurriculumSchedule::advance() {
  ++steps_;
  // mu0 - k * beta rather than repeated subtraction: the latter leaves
  // residue like 5.6e-17 at k == end_epoch.
  mu_ = steps_ >= end_epoch_ ? 0.0 : std::max(mu0_ - static_cast<double>(steps_) * beta_, 0.0);
}

double included_fraction(std::span<const double> scores, double mu) {
  if (scores.empty()) throw std::invalid_argument("included_fraction: no scores");
  const auto passing = std::count_if(scores.begin(), scores.end(), [&](double s) { return is_included(s, mu); });
  return static_cast<double>(passing) / static_cast<double>(scores.size());
}

}  // namespace confls
