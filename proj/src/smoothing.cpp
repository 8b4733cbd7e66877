#include "confls/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace confls {

namespace {

void check_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("smoothing alpha must lie in [0, 1), got " + std::to_string(alpha));
  }
}

ProbVector smooth_with_factors(const ProbVector& p, const std::vector<double>& factors) {
  const std::size_t n = p.size();
  const double classes = static_cast<double>(n);
  std::vector<double> raw(n);
  for (std::size_t i = 0; i < n; ++i) {
    raw[i] = p[i] * (1.0 - factors[i]) + factors[i] / classes;
  }
  const bool constant = std::all_of(factors.begin(), factors.end(),
                                    [&](double f) { return f == factors.front(); });
  if (!constant) {
    double sum = 0.0;
    for (double v : raw) sum += v;
    for (double& v : raw) v /= sum;
  }
  return ProbVector(std::move(raw));
}

ProbVector confidence_smooth(const ProbVector& p, const ProbVector& confidence, const SmoothingConfig& cfg) {
  check_alpha(cfg.alpha);
  if (!(cfg.gamma >= 0.0)) throw std::invalid_argument("smoothing gamma must be non-negative");
  if (p.size() != confidence.size()) {
    throw std::invalid_argument("target has " + std::to_string(p.size()) + " classes but confidence has " +
                                std::to_string(confidence.size()));
  }
  std::vector<double> factors(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    factors[i] = std::clamp(cfg.alpha + cfg.gamma * confidence[i], 0.0, 1.0);
  }
  return smooth_with_factors(p, factors);
}

}  // namespace

ProbVector one_hot(std::size_t cls, std::size_t n) {
  if (cls >= n) {
    throw std::out_of_range("class " + std::to_string(cls) + " out of range for " + std::to_string(n) +
                            " classes");
  }
  std::vector<double> v(n, 0.0);
  v[cls] = 1.0;
  return ProbVector(std::move(v));
}

ProbVector uniform_smooth(const ProbVector& p, double alpha) {
  check_alpha(alpha);
  return smooth_with_factors(p, std::vector<double>(p.size(), alpha));
}

ProbVector mc_smooth(const ProbVector& p, const ProbVector& model_confidence, const SmoothingConfig& cfg) {
  return confidence_smooth(p, model_confidence, cfg);
}

ProbVector hc_smooth(const ProbVector& p, const ProbVector& human_confidence, const SmoothingConfig& cfg) {
  return confidence_smooth(p, human_confidence, cfg);
}

double cross_entropy(const ProbVector& target, const ProbVector& pred) {
  if (target.size() != pred.size()) {
    throw std::invalid_argument("cross_entropy: target has " + std::to_string(target.size()) +
                                " entries, prediction has " + std::to_string(pred.size()));
  }
  double loss = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    if (target[i] != 0.0) loss -= target[i] * std::log(std::max(pred[i], kLogFloor));
  }
  return loss;
}

}  // namespace confls
