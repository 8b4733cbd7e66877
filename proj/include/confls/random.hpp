#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace confls {

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Derives an independent stream seed from a base seed and a salt (e.g. an
/// epoch number or a purpose tag).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) noexcept;

/// Seeded generator whose outputs are identical across standard libraries.
/// std::mt19937_64 has a fully specified sequence, but the std distributions
/// do not, so every draw goes through the helpers below.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, n). Requires n > 0.
  std::size_t index(std::size_t n);
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }
  /// Samples an index with probability proportional to `weights`.
  std::size_t discrete(std::span<const double> weights);

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[index(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace confls
