#pragma once

#include <cstddef>
#include <span>

#include "confls/confidence.hpp"

namespace confls {

/// Score at descending rank ceil(r * n): exactly the top ceil(r * n) scores
/// are >= the result, plus any ties with it. Throws std::invalid_argument for
/// empty scores or r outside (0, 1].
double initial_threshold(std::span<const double> scores, double r);

/// mu0 / end_epoch. Throws std::invalid_argument if end_epoch < 1.
double update_factor(double mu0, int end_epoch);

/// Linearly decaying ranking threshold. After k advances mu equals
/// max(mu0 - k * beta, 0), and exactly 0 once k >= end_epoch, so the whole
/// training set is in use from the ending epoch on.
class CurriculumSchedule {
 public:
  /// Derives mu0 from `scores` and the easy ratio `r`, and beta from mu0.
  CurriculumSchedule(std::span<const double> scores, double r, int end_epoch, ConfidenceKind criterion);
  /// Starts from an explicit threshold.
  CurriculumSchedule(double mu0, int end_epoch, ConfidenceKind criterion);

  [[nodiscard]] double mu() const noexcept { return mu_; }
  [[nodiscard]] double mu0() const noexcept { return mu0_; }
  [[nodiscard]] double beta() const noexcept { return beta_; }
  [[nodiscard]] int end_epoch() const noexcept { return end_epoch_; }
  [[nodiscard]] int steps() const noexcept { return steps_; }
  [[nodiscard]] ConfidenceKind criterion() const noexcept { return criterion_; }

  /// One epoch boundary.
  void advance();

 private:
  double mu0_;
  double beta_;
  int end_epoch_;
  ConfidenceKind criterion_;
  int steps_ = 0;
  double mu_;
};

/// `sample_loss` when score >= mu, else 0.
inline double gate_loss(double sample_loss, double score, double mu) noexcept {
  return score >= mu ? sample_loss : 0.0;
}

inline bool is_included(double score, double mu) noexcept { return score >= mu; }

/// Fraction of scores >= mu. Throws std::invalid_argument on empty input.
double included_fraction(std::span<const double> scores, double mu);

}  // namespace confls
