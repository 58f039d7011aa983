#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "stride/array2d.hpp"

namespace stride::fft {

using Complex = std::complex<double>;

/// Half spectrum of a real rows x cols array: rows x (cols/2 + 1), row-major.
struct HalfSpectrum {
  std::size_t rows = 0;
  std::size_t cols = 0;  // logical (real-domain) column count
  std::vector<Complex> bins;

  std::size_t half_cols() const noexcept { return cols / 2 + 1; }
  Complex& at(std::size_t r, std::size_t k) { return bins[r * half_cols() + k]; }
  const Complex& at(std::size_t r, std::size_t k) const { return bins[r * half_cols() + k]; }
};

/// Unnormalised forward DFT over both axes.
HalfSpectrum forward(const Array2D& x);
/// Inverse of forward(), including the 1/(rows*cols) factor.
Array2D inverse(const HalfSpectrum& s);

/// Multiplies the 2-D DFT of x by a real, point-symmetric response given on
/// the full rows x cols frequency grid, and transforms back.
Array2D apply_response(const Array2D& x, const Array2D& response);

/// Unnormalised forward DFT of a real 1-D sequence (n/2 + 1 bins).
std::vector<Complex> forward_1d(const std::vector<double>& x);
std::vector<double> inverse_1d(const std::vector<Complex>& s, std::size_t n);

}  // namespace stride::fft
