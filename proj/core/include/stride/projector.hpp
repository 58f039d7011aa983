#pragma once

#include <cstdint>

#include "stride/geometry.hpp"

namespace stride {

enum class NoiseKind { none, gaussian };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::none;
  double sigma = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Ray-driven line integrals: every ray is clipped to the image square and sampled
/// at midpoints of equal steps no longer than half a pixel, with bilinear
/// interpolation (zero outside the grid).
Sinogram forward_project(const ImageGrid& x, const FanBeamGeometry& g);

/// Exact transpose of forward_project.
ImageGrid adjoint_project(const Sinogram& s, const FanBeamGeometry& g, const ImageShape& shape);

/// apply_mask(forward_project(x, g) + noise, m).
Sinogram simulate_measurement(const ImageGrid& x, const FanBeamGeometry& g, const NoiseSpec& noise,
                              const SparseMask& m);

}  // namespace stride
