#include "stride/wavelet.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace stride {

namespace {

const FilterPair kHaar{{std::numbers::sqrt2 / 2, std::numbers::sqrt2 / 2},
                       {std::numbers::sqrt2 / 2, -std::numbers::sqrt2 / 2}};

FilterPair make_db2() {
  const double s3 = std::sqrt(3.0);
  const double d = 4.0 * std::numbers::sqrt2;
  // Daubechies-2 scaling coefficients h0..h3; lo is their time reverse.
  const double h[4] = {(1 + s3) / d, (3 + s3) / d, (3 - s3) / d, (1 - s3) / d};
  FilterPair p;
  p.lo = {h[3], h[2], h[1], h[0]};
  p.hi = {-h[0], h[1], -h[2], h[3]};
  return p;
}

const FilterPair kDb2 = make_db2();

// Periodic filtering along rows (axis 0) or columns (axis 1).
Array2D filt(const Array2D& x, const std::vector<double>& f, int axis, bool adjoint) {
  const std::size_t R = x.rows();
  const std::size_t C = x.cols();
  Array2D y(R, C);
  for (std::size_t k = 0; k < f.size(); ++k) {
    const double fk = f[k];
    if (axis == 0) {
      const std::size_t sh = k % R;
      for (std::size_t r = 0; r < R; ++r) {
        const std::size_t src = adjoint ? (r + sh) % R : (r + R - sh) % R;
        auto in = x.row(src);
        auto out = y.row(r);
        for (std::size_t c = 0; c < C; ++c) out[c] += fk * in[c];
      }
    } else {
      const std::size_t sh = k % C;
      for (std::size_t r = 0; r < R; ++r) {
        auto in = x.row(r);
        auto out = y.row(r);
        for (std::size_t c = 0; c < C; ++c) {
          const std::size_t src = adjoint ? (c + sh) % C : (c + C - sh) % C;
          out[c] += fk * in[src];
        }
      }
    }
  }
  return y;
}

std::vector<double> power_1d(const std::vector<double>& f, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) {
      const double ph = -2.0 * std::numbers::pi * static_cast<double>(k * j % n) /
                        static_cast<double>(n);
      acc += f[j] * std::complex<double>(std::cos(ph), std::sin(ph));
    }
    out[k] = std::norm(acc);
  }
  return out;
}

}  // namespace

const FilterPair& wavelet_filters(WaveletFilter f) {
  return f == WaveletFilter::haar ? kHaar : kDb2;
}

WaveletFilter parse_wavelet(const std::string& name) {
  if (name == "haar") return WaveletFilter::haar;
  if (name == "db2") return WaveletFilter::db2;
  throw std::invalid_argument("wavelet: unsupported filter " + name);
}

std::string to_string(WaveletFilter f) { return f == WaveletFilter::haar ? "haar" : "db2"; }

WaveletBands swt_decompose(const Array2D& x, WaveletFilter f, int level) {
  if (level != 1) throw std::invalid_argument("wavelet: only level 1 is supported");
  if (x.empty()) throw ShapeError("wavelet: empty input");
  const auto& fp = wavelet_filters(f);
  const Array2D a = filt(x, fp.lo, 0, false);
  const Array2D d = filt(x, fp.hi, 0, false);
  WaveletBands b;
  b.filter = f;
  b.level = level;
  b.low = filt(a, fp.lo, 1, false);
  b.high[0] = filt(a, fp.hi, 1, false);
  b.high[1] = filt(d, fp.lo, 1, false);
  b.high[2] = filt(d, fp.hi, 1, false);
  return b;
}

WaveletBands swt_decompose(const Array2D& x, const std::string& filter_name, int level) {
  return swt_decompose(x, parse_wavelet(filter_name), level);
}

WaveletBands swt_decompose(const Sinogram& s, WaveletFilter f, int level) {
  return swt_decompose(s.values, f, level);
}

Array2D iswt_reconstruct(const WaveletBands& b) {
  if (b.level != 1) throw std::invalid_argument("wavelet: only level 1 is supported");
  for (const auto& h : b.high) require_same_shape(b.low, h, "iswt_reconstruct");
  const auto& fp = wavelet_filters(b.filter);
  Array2D a = filt(b.low, fp.lo, 1, true);
  a += filt(b.high[0], fp.hi, 1, true);
  Array2D d = filt(b.high[1], fp.lo, 1, true);
  d += filt(b.high[2], fp.hi, 1, true);
  Array2D out = filt(a, fp.lo, 0, true);
  out += filt(d, fp.hi, 0, true);
  out *= 0.25;
  return out;
}

Sinogram iswt_reconstruct(const WaveletBands& b, const FanBeamGeometry& g) {
  return Sinogram(g, iswt_reconstruct(b));
}

Array2D band_power_response(WaveletFilter f, int band, std::size_t rows, std::size_t cols) {
  if (band < 0 || band > 3) throw std::invalid_argument("wavelet: band index out of range");
  const auto& fp = wavelet_filters(f);
  const auto pr = power_1d(band == LL || band == LH ? fp.lo : fp.hi, rows);
  const auto pc = power_1d(band == LL || band == HL ? fp.lo : fp.hi, cols);
  Array2D out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out(r, c) = pr[r] * pc[c];
  }
  return out;
}

}  // namespace stride
