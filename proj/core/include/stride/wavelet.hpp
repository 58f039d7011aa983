#pragma once

#include <array>
#include <string>
#include <vector>

#include "stride/geometry.hpp"

namespace stride {

enum class WaveletFilter { haar, db2 };

struct FilterPair {
  std::vector<double> lo;
  std::vector<double> hi;
};

/// Orthonormal decomposition filters, convolution order (y[n] = sum_k f[k] x[n - k]).
const FilterPair& wavelet_filters(WaveletFilter f);
WaveletFilter parse_wavelet(const std::string& name);
std::string to_string(WaveletFilter f);

enum Band : int { LL = 0, LH = 1, HL = 2, HH = 3 };

/// Undecimated level-1 bands. The first letter is the filter applied across views
/// (rows), the second across detectors (columns).
struct WaveletBands {
  Array2D low;
  std::array<Array2D, 3> high;  // LH, HL, HH
  int level = 1;
  WaveletFilter filter = WaveletFilter::haar;

  Array2D& band(int b) { return b == LL ? low : high[static_cast<std::size_t>(b - 1)]; }
  const Array2D& band(int b) const { return b == LL ? low : high[static_cast<std::size_t>(b - 1)]; }
};

/// Periodic-boundary separable analysis. Only level 1 is supported.
WaveletBands swt_decompose(const Array2D& x, WaveletFilter f = WaveletFilter::haar, int level = 1);
WaveletBands swt_decompose(const Array2D& x, const std::string& filter_name, int level = 1);
WaveletBands swt_decompose(const Sinogram& s, WaveletFilter f = WaveletFilter::haar, int level = 1);

/// Exact inverse of swt_decompose: one quarter of the adjoint analysis.
Array2D iswt_reconstruct(const WaveletBands& b);
Sinogram iswt_reconstruct(const WaveletBands& b, const FanBeamGeometry& g);

/// |H_b|^2 of band b's 2-D analysis filter on the rows x cols periodic frequency grid.
Array2D band_power_response(WaveletFilter f, int band, std::size_t rows, std::size_t cols);

}  // namespace stride
