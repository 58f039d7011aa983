#include "stride/projector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "stride/parallel.hpp"
#include "stride/rng.hpp"

namespace stride {

namespace {

constexpr std::size_t kViewBlock = 8;

struct Ray {
  double ox, oy;  // a point on the ray
  double dx, dy;  // unit direction
};

Ray make_ray(const FanBeamGeometry& g, std::size_t view, std::size_t det) {
  const double th = g.angle(view);
  const double s = std::sin(th);
  const double c = std::cos(th);
  if (g.beam == BeamKind::parallel) {
    const double r = g.iso_coordinate(det);
    return {r * c, r * s, -s, c};
  }
  const double D = g.source_to_center;
  const double C = g.center_to_detector;
  const double u =
      (static_cast<double>(det) - 0.5 * static_cast<double>(g.n_detectors - 1)) *
      g.detector_spacing();
  const double sx = D * s;
  const double sy = -D * c;
  const double px = -C * s + u * c;
  const double py = C * c + u * s;
  const double len = std::hypot(px - sx, py - sy);
  return {sx, sy, (px - sx) / len, (py - sy) / len};
}

// Calls visit(flat_pixel_index, weight) for every interpolation tap along the ray.
template <class Visit>
void trace(const Ray& ray, const ImageShape& shape, Visit&& visit) {
  const double p = shape.pixel_size;
  const double hx = 0.5 * static_cast<double>(shape.nx) * p;
  const double hy = 0.5 * static_cast<double>(shape.ny) * p;
  double t0 = -std::numeric_limits<double>::infinity();
  double t1 = std::numeric_limits<double>::infinity();
  auto slab = [&](double o, double d, double h) {
    if (std::abs(d) < 1e-15) {
      if (o < -h || o > h) t1 = -std::numeric_limits<double>::infinity();
      return;
    }
    double a = (-h - o) / d;
    double b = (h - o) / d;
    if (a > b) std::swap(a, b);
    t0 = std::max(t0, a);
    t1 = std::min(t1, b);
  };
  slab(ray.ox, ray.dx, hx);
  slab(ray.oy, ray.dy, hy);
  if (!(t1 > t0)) return;
  const double len = t1 - t0;
  const auto steps = static_cast<std::size_t>(std::ceil(len / (0.5 * p)));
  if (steps == 0) return;
  const double dt = len / static_cast<double>(steps);
  const auto nx = static_cast<long>(shape.nx);
  const auto ny = static_cast<long>(shape.ny);
  const double cx = 0.5 * static_cast<double>(shape.nx) - 0.5;
  const double cy = 0.5 * static_cast<double>(shape.ny) - 0.5;
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = t0 + (static_cast<double>(k) + 0.5) * dt;
    const double col = (ray.ox + t * ray.dx) / p + cx;
    const double row = cy - (ray.oy + t * ray.dy) / p;
    const double jf = std::floor(col);
    const double if_ = std::floor(row);
    const double fx = col - jf;
    const double fy = row - if_;
    const long j0 = static_cast<long>(jf);
    const long i0 = static_cast<long>(if_);
    const double w[4] = {(1 - fy) * (1 - fx) * dt, (1 - fy) * fx * dt, fy * (1 - fx) * dt,
                         fy * fx * dt};
    const long ii[4] = {i0, i0, i0 + 1, i0 + 1};
    const long jj[4] = {j0, j0 + 1, j0, j0 + 1};
    for (int q = 0; q < 4; ++q) {
      if (ii[q] < 0 || ii[q] >= ny || jj[q] < 0 || jj[q] >= nx) continue;
      visit(static_cast<std::size_t>(ii[q] * nx + jj[q]), w[q]);
    }
  }
}

void check_image(const ImageGrid& x) {
  if (x.values.rows() != x.ny() || x.values.cols() != x.nx()) {
    throw ShapeError("projector: image values do not match its shape");
  }
  x.shape.validate();
  if (!x.values.all_finite()) throw std::invalid_argument("projector: non-finite image");
}

}  // namespace

void NoiseSpec::validate() const {
  if (!std::isfinite(sigma) || sigma < 0.0) {
    throw std::invalid_argument("noise: sigma must be finite and >= 0");
  }
}

Sinogram forward_project(const ImageGrid& x, const FanBeamGeometry& g) {
  g.validate();
  check_image(x);
  Sinogram out(g);
  const double* img = x.values.data();
  parallel_for(g.n_views, [&](std::size_t v) {
    auto row = out.values.row(v);
    for (std::size_t d = 0; d < g.n_detectors; ++d) {
      double acc = 0.0;
      trace(make_ray(g, v, d), x.shape, [&](std::size_t idx, double w) { acc += w * img[idx]; });
      row[d] = acc;
    }
  });
  return out;
}

ImageGrid adjoint_project(const Sinogram& s, const FanBeamGeometry& g, const ImageShape& shape) {
  g.validate();
  shape.validate();
  if (s.values.rows() != g.n_views || s.values.cols() != g.n_detectors) {
    throw ShapeError("adjoint_project: sinogram does not match geometry");
  }
  const std::size_t n_blocks = (g.n_views + kViewBlock - 1) / kViewBlock;
  std::vector<Array2D> partial(n_blocks);
  parallel_for(n_blocks, [&](std::size_t b) {
    Array2D acc(shape.ny, shape.nx);
    double* out = acc.data();
    const std::size_t end = std::min(g.n_views, (b + 1) * kViewBlock);
    for (std::size_t v = b * kViewBlock; v < end; ++v) {
      auto row = s.values.row(v);
      for (std::size_t d = 0; d < g.n_detectors; ++d) {
        const double val = row[d];
        if (val == 0.0) continue;
        trace(make_ray(g, v, d), shape, [&](std::size_t idx, double w) { out[idx] += w * val; });
      }
    }
    partial[b] = std::move(acc);
  });
  ImageGrid img(shape);
  for (const auto& p : partial) img.values += p;
  return img;
}

Sinogram simulate_measurement(const ImageGrid& x, const FanBeamGeometry& g, const NoiseSpec& noise,
                              const SparseMask& m) {
  noise.validate();
  if (m.n_views() != g.n_views) throw ShapeError("simulate: mask does not match geometry");
  Sinogram s = forward_project(x, g);
  if (noise.kind == NoiseKind::gaussian && noise.sigma > 0.0) {
    Rng rng(noise.seed);
    for (double& v : s.values.flat()) v += noise.sigma * rng.normal();
  }
  return apply_mask(s, m);
}

}  // namespace stride
