#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "stride/array2d.hpp"
#include "stride/rng.hpp"

namespace stride::testkit {

inline Array2D random_array(std::size_t rows, std::size_t cols, std::uint64_t seed,
                            std::uint64_t stream = 0) {
  Rng rng(seed, stream);
  return rng.normal_like(rows, cols);
}

inline Array2D constant_array(std::size_t rows, std::size_t cols, double v) {
  return Array2D(rows, cols, v);
}

// Direct O(N^2) 2-D DFT, used as an oracle for FFT-based code.
inline std::vector<std::complex<double>> naive_dft2(const Array2D& x) {
  const std::size_t R = x.rows(), C = x.cols();
  std::vector<std::complex<double>> out(R * C);
  for (std::size_t u = 0; u < R; ++u) {
    for (std::size_t v = 0; v < C; ++v) {
      std::complex<double> acc = 0.0;
      for (std::size_t r = 0; r < R; ++r) {
        for (std::size_t c = 0; c < C; ++c) {
          const double ph = -2.0 * std::numbers::pi *
                            (static_cast<double>(u * r) / static_cast<double>(R) +
                             static_cast<double>(v * c) / static_cast<double>(C));
          acc += x(r, c) * std::complex<double>(std::cos(ph), std::sin(ph));
        }
      }
      out[u * C + v] = acc;
    }
  }
  return out;
}

}  // namespace stride::testkit
