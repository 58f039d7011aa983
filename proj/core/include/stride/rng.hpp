#pragma once

#include <cstdint>
#include <random>

#include "stride/array2d.hpp"

namespace stride {

/// Seeded generator for one named stream. Two Rng objects built from the same
/// (seed, stream) pair produce identical sequences.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  /// Uniform integer in [lo, hi].
  int uniform_int(int lo, int hi);
  bool bernoulli(double p) { return uniform() < p; }

  void fill_normal(Array2D& out);
  Array2D normal_like(std::size_t rows, std::size_t cols);

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace stride
