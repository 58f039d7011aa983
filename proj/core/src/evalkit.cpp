#include "stride/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace stride {

namespace {

constexpr double deg(double d) { return d * std::numbers::pi / 180.0; }

}  // namespace

std::vector<Ellipse> shepp_logan_table() {
  return {
      {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},
      {-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0},
      {-0.2, 0.11, 0.31, 0.22, 0.0, deg(-18.0)},
      {-0.2, 0.16, 0.41, -0.22, 0.0, deg(18.0)},
      {0.1, 0.21, 0.25, 0.0, 0.35, 0.0},
      {0.1, 0.046, 0.046, 0.0, 0.1, 0.0},
      {0.1, 0.046, 0.046, 0.0, -0.1, 0.0},
      {0.1, 0.046, 0.023, -0.08, -0.605, 0.0},
      {0.1, 0.023, 0.023, 0.0, -0.606, 0.0},
      {0.1, 0.023, 0.046, 0.06, -0.605, 0.0},
  };
}

std::vector<Ellipse> random_shepp_logan_table(Rng& rng) {
  auto table = shepp_logan_table();
  auto u = [&] { return 2.0 * rng.uniform() - 1.0; };
  for (std::size_t i = 2; i < table.size(); ++i) {
    auto& e = table[i];
    e.density *= 1.0 + 0.3 * u();
    e.x0 += 0.03 * u();
    e.y0 += 0.03 * u();
    e.a *= 1.0 + 0.15 * u();
    e.b *= 1.0 + 0.15 * u();
  }
  return table;
}

ImageGrid rasterize_ellipses(const std::vector<Ellipse>& table, const ImageShape& shape) {
  shape.validate();
  ImageGrid img(shape);
  const double nx = static_cast<double>(shape.nx);
  const double ny = static_cast<double>(shape.ny);
  for (const auto& e : table) {
    if (!(e.a > 0.0 && e.b > 0.0)) throw std::invalid_argument("ellipse: semi-axes must be > 0");
    const double c = std::cos(e.theta);
    const double s = std::sin(e.theta);
    for (std::size_t i = 0; i < shape.ny; ++i) {
      const double y = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / ny;
      for (std::size_t j = 0; j < shape.nx; ++j) {
        const double x = (2.0 * static_cast<double>(j) + 1.0) / nx - 1.0;
        const double xr = (x - e.x0) * c + (y - e.y0) * s;
        const double yr = -(x - e.x0) * s + (y - e.y0) * c;
        if ((xr / e.a) * (xr / e.a) + (yr / e.b) * (yr / e.b) <= 1.0) img.values(i, j) += e.density;
      }
    }
  }
  for (double& v : img.values.flat()) v = std::clamp(v, 0.0, 1.0);
  return img;
}

ImageGrid shepp_logan(std::size_t nx, std::size_t ny) {
  return shepp_logan(ImageShape{nx, ny, 64.0 / static_cast<double>(std::max(nx, ny))});
}

ImageGrid shepp_logan(const ImageShape& shape) {
  if (shape.nx < 16 || shape.ny < 16) throw std::invalid_argument("shepp_logan: size must be >= 16");
  return rasterize_ellipses(shepp_logan_table(), shape);
}

double mse(const Array2D& a, const Array2D& b) {
  require_same_shape(a, b, "mse");
  if (a.empty()) throw std::invalid_argument("mse: empty input");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.data()[i] - b.data()[i];
    s += d * d;
  }
  return s / static_cast<double>(a.size());
}

double psnr(const Array2D& a, const Array2D& b, double data_range) {
  if (!(data_range > 0.0)) throw std::invalid_argument("psnr: data_range must be > 0");
  const double m = mse(a, b);
  if (m == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(data_range * data_range / m);
}

double ssim(const Array2D& a, const Array2D& b, double data_range) {
  require_same_shape(a, b, "ssim");
  if (!(data_range > 0.0)) throw std::invalid_argument("ssim: data_range must be > 0");
  constexpr std::size_t w = 7;
  if (a.rows() < w || a.cols() < w) throw std::invalid_argument("ssim: arrays must be at least 7x7");
  const double c1 = std::pow(0.01 * data_range, 2);
  const double c2 = std::pow(0.03 * data_range, 2);
  const double np = static_cast<double>(w * w);
  const double cov_norm = np / (np - 1.0);
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i + w <= a.rows(); ++i) {
    for (std::size_t j = 0; j + w <= a.cols(); ++j) {
      double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
      for (std::size_t di = 0; di < w; ++di) {
        for (std::size_t dj = 0; dj < w; ++dj) {
          const double x = a(i + di, j + dj);
          const double y = b(i + di, j + dj);
          sa += x;
          sb += y;
          saa += x * x;
          sbb += y * y;
          sab += x * y;
        }
      }
      const double ma = sa / np, mb = sb / np;
      const double va = cov_norm * (saa / np - ma * ma);
      const double vb = cov_norm * (sbb / np - mb * mb);
      const double vab = cov_norm * (sab / np - ma * mb);
      total += ((2 * ma * mb + c1) * (2 * vab + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

double kl_divergence(const Array2D& a, const Array2D& b, std::size_t n_bins) {
  if (n_bins < 8) throw std::invalid_argument("kl_divergence: need at least 8 bins");
  if (a.empty() || b.empty()) throw std::invalid_argument("kl_divergence: empty input");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const Array2D* x : {&a, &b}) {
    for (double v : x->flat()) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  auto hist = [&](const Array2D& x) {
    std::vector<double> h(n_bins, 0.0);
    const double width = hi - lo;
    for (double v : x.flat()) {
      std::size_t k = 0;
      if (width > 0.0) {
        k = static_cast<std::size_t>((v - lo) / width * static_cast<double>(n_bins));
        k = std::min(k, n_bins - 1);
      }
      h[k] += 1.0;
    }
    const double norm = 1.0 + 1e-12 * static_cast<double>(n_bins);
    for (double& p : h) p = (p / static_cast<double>(x.size()) + 1e-12) / norm;
    return h;
  };
  const auto p = hist(a);
  const auto q = hist(b);
  double kl = 0.0;
  for (std::size_t k = 0; k < n_bins; ++k) kl += p[k] * std::log(p[k] / q[k]);
  return std::max(kl, 0.0);
}

}  // namespace stride
