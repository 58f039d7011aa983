#include "stride/rng.hpp"

namespace stride {

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  engine_.seed(seq);
}

int Rng::uniform_int(int lo, int hi) {
  std::uniform_int_distribution<int> dist(lo, hi);
  return dist(engine_);
}

void Rng::fill_normal(Array2D& out) {
  for (double& v : out.flat()) v = normal();
}

Array2D Rng::normal_like(std::size_t rows, std::size_t cols) {
  Array2D out(rows, cols);
  fill_normal(out);
  return out;
}

}  // namespace stride
