#include "stride/fbp.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "stride/fft.hpp"
#include "stride/parallel.hpp"

namespace stride {

namespace {

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

double window(const FilterSpec& f, double freq) {
  const double fc = 0.5 * f.cutoff;
  if (freq > fc + 1e-15) return 0.0;
  if (f.kind == FilterKind::ram_lak) return 1.0;
  return 0.5 * (1.0 + std::cos(std::numbers::pi * freq / fc));
}

// Real frequency response on an L-point grid (first L/2 + 1 bins).
std::vector<double> response(const FilterSpec& f, std::size_t nd, double tau, std::size_t L) {
  std::vector<double> resp(L / 2 + 1);
  if (f.padding == FilterPadding::periodic) {
    for (std::size_t k = 0; k < resp.size(); ++k) {
      const double freq = static_cast<double>(k) / static_cast<double>(L);
      resp[k] = freq / tau * window(f, freq);
    }
    return resp;
  }
  const auto kern = ramp_kernel(nd - 1, tau);
  std::vector<double> circ(L, 0.0);
  for (std::size_t i = 0; i < kern.size(); ++i) {
    const long n = static_cast<long>(i) - static_cast<long>(nd - 1);
    circ[static_cast<std::size_t>((n + static_cast<long>(L)) % static_cast<long>(L))] = kern[i];
  }
  const auto spec = fft::forward_1d(circ);
  for (std::size_t k = 0; k < resp.size(); ++k) {
    const double freq = static_cast<double>(k) / static_cast<double>(L);
    resp[k] = spec[k].real() * window(f, freq);
  }
  return resp;
}

}  // namespace

void FilterSpec::validate() const {
  if (!(cutoff > 0.0 && cutoff <= 1.0)) throw std::invalid_argument("filter: cutoff must be in (0, 1]");
}

std::vector<double> ramp_kernel(std::size_t half, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("ramp_kernel: tau must be > 0");
  std::vector<double> k(2 * half + 1, 0.0);
  for (std::size_t i = 0; i < k.size(); ++i) {
    const long n = static_cast<long>(i) - static_cast<long>(half);
    if (n == 0) {
      k[i] = 1.0 / (4.0 * tau);
    } else if (n % 2 != 0) {
      const double nn = static_cast<double>(n);
      k[i] = -1.0 / (nn * nn * std::numbers::pi * std::numbers::pi * tau);
    }
  }
  return k;
}

Sinogram fan_preweight(const Sinogram& s) {
  Sinogram out = s;
  const auto& g = s.geometry;
  if (g.beam == BeamKind::parallel) return out;
  const double D = g.source_to_center;
  for (std::size_t d = 0; d < g.n_detectors; ++d) {
    const double r = g.iso_coordinate(d);
    const double w = D / std::sqrt(D * D + r * r);
    for (std::size_t v = 0; v < g.n_views; ++v) out.values(v, d) *= w;
  }
  return out;
}

Sinogram filter_projections(const Sinogram& s, const FilterSpec& f) {
  f.validate();
  s.validate();
  const std::size_t nd = s.n_detectors();
  const double tau = s.geometry.iso_spacing();
  const std::size_t L = f.padding == FilterPadding::periodic ? nd : next_pow2(2 * nd - 1);
  const auto resp = response(f, nd, tau, L);
  Sinogram out(s.geometry);
  parallel_for(s.n_views(), [&](std::size_t v) {
    std::vector<double> row(L, 0.0);
    auto src = s.values.row(v);
    std::copy(src.begin(), src.end(), row.begin());
    auto spec = fft::forward_1d(row);
    for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= resp[k];
    const auto back = fft::inverse_1d(spec, L);
    auto dst = out.values.row(v);
    std::copy(back.begin(), back.begin() + static_cast<long>(nd), dst.begin());
  });
  return out;
}

ImageGrid fan_backproject(const Sinogram& q, const FanBeamGeometry& g, const ImageShape& shape,
                          BackprojectionWeight weight) {
  g.validate();
  shape.validate();
  if (q.values.rows() != g.n_views || q.values.cols() != g.n_detectors) {
    throw ShapeError("fan_backproject: sinogram does not match geometry");
  }
  std::vector<double> sn(g.n_views), cs(g.n_views);
  for (std::size_t v = 0; v < g.n_views; ++v) {
    sn[v] = std::sin(g.angle(v));
    cs[v] = std::cos(g.angle(v));
  }
  const double D = g.source_to_center;
  const double tau = g.iso_spacing();
  const double centre = 0.5 * static_cast<double>(g.n_detectors - 1);
  const double last = static_cast<double>(g.n_detectors - 1);
  const bool fan = g.beam == BeamKind::fan;
  ImageGrid img(shape);
  parallel_for(shape.ny, [&](std::size_t i) {
    const double y = (0.5 * static_cast<double>(shape.ny) - static_cast<double>(i) - 0.5) *
                     shape.pixel_size;
    for (std::size_t j = 0; j < shape.nx; ++j) {
      const double x = (static_cast<double>(j) + 0.5 - 0.5 * static_cast<double>(shape.nx)) *
                       shape.pixel_size;
      double acc = 0.0;
      for (std::size_t v = 0; v < g.n_views; ++v) {
        const double t = x * cs[v] + y * sn[v];
        double r = t;
        double w = 1.0;
        if (fan) {
          const double U = D - (x * sn[v] - y * cs[v]);
          r = D * t / U;
          w = weight == BackprojectionWeight::distance ? D * D / (U * U) : D * D / (D * D + r * r);
        }
        const double idx = r / tau + centre;
        if (idx < 0.0 || idx > last) continue;
        const auto k = static_cast<std::size_t>(idx);
        const double fr = idx - static_cast<double>(k);
        double val = q.values(v, k);
        if (k + 1 < g.n_detectors) val += fr * (q.values(v, k + 1) - val);
        acc += w * val;
      }
      img.values(i, j) = acc * g.angle_step();
    }
  });
  return img;
}

ImageGrid fbp_reconstruct(const Sinogram& s, const FanBeamGeometry& g, const FilterSpec& f,
                          const ImageShape& shape, const FbpOptions& opts) {
  if (!(s.geometry == g)) {
    if (s.values.rows() != g.n_views || s.values.cols() != g.n_detectors) {
      throw ShapeError("fbp: sinogram does not match geometry");
    }
  }
  Sinogram work(g, s.values);
  if (opts.fan_preweight) work = fan_preweight(work);
  const Sinogram q = filter_projections(work, f);
  ImageGrid img = fan_backproject(q, g, shape, opts.weight);
  img.values *= std::numbers::pi / g.angular_range();
  return img;
}

}  // namespace stride
