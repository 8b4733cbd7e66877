#pragma once

#include <cstddef>

#include "confls/prob_vector.hpp"

namespace confls {

/// Base smoothing factor `alpha` and the weight `gamma` given to a
/// per-class confidence vector. Per-class factors alpha + gamma * c_n are
/// clamped to [0, 1] when applied, so alpha + gamma may exceed 1.
struct SmoothingConfig {
  double alpha = 0.1;
  double gamma = 0.1;
};

/// Target with all mass on `cls`. Throws std::out_of_range if cls >= n.
ProbVector one_hot(std::size_t cls, std::size_t n);

/// Classic label smoothing: p_n (1 - alpha) + alpha / N.
/// Throws std::invalid_argument unless 0 <= alpha < 1.
ProbVector uniform_smooth(const ProbVector& p, double alpha);

/// Confidence-weighted smoothing with one factor per class,
///
///   a_n   = clamp(alpha + gamma * c_n, 0, 1)
///   raw_n = p_n (1 - a_n) + a_n / N
///
/// renormalized by sum(raw). When every a_n is equal the raw vector is
/// already a distribution and is returned as is, which makes gamma == 0
/// (or a uniform confidence vector) reproduce uniform_smooth bit for bit.
///
/// `confidence` is the baseline model's softmax output for mc_smooth and the
/// rater distribution for hc_smooth; the arithmetic is shared.
/// Throws std::invalid_argument on a length mismatch or alpha outside [0, 1)
/// or negative gamma.
ProbVector mc_smooth(const ProbVector& p, const ProbVector& model_confidence, const SmoothingConfig& cfg);
ProbVector hc_smooth(const ProbVector& p, const ProbVector& human_confidence, const SmoothingConfig& cfg);

/// Predictions below this are clamped before taking the log.
inline constexpr double kLogFloor = 1e-12;

/// -sum_n target_n ln(max(pred_n, kLogFloor)), in nats.
/// Throws std::invalid_argument on a length mismatch.
double cross_entropy(const ProbVector& target, const ProbVector& pred);

}  // namespace confls
