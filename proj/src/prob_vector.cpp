#include "confls/prob_vector.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace confls {

ProbVector::ProbVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw std::invalid_argument("probability vector is empty");
  double sum = 0.0;
  for (double v : values_) {
    if (!std::isfinite(v) || v < 0.0) {
      throw std::invalid_argument("probability vector has a negative or non-finite entry");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > kTolerance) {
    throw std::invalid_argument("probability vector sums to " + std::to_string(sum));
  }
}

ProbVector ProbVector::uniform(std::size_t n) {
  if (n == 0) throw std::invalid_argument("uniform distribution over zero classes");
  return ProbVector(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

std::size_t ProbVector::argmax() const { return argmax_lowest(values_); }

double ProbVector::max() const { return values_[argmax()]; }

}  // namespace confls
