#pragma once

#include <cmath>
#include <vector>

#include "stride/geometry.hpp"

namespace stride {

enum class FilterKind { ram_lak, hann };

/// zero_pad: linear convolution with the spatial kernel (rows padded to a power of two).
/// periodic: circular convolution with the periodised kernel, whose DC gain is exactly 0.
enum class FilterPadding { zero_pad, periodic };

struct FilterSpec {
  FilterKind kind = FilterKind::ram_lak;
  double cutoff = 1.0;  // fraction of Nyquist, in (0, 1]
  FilterPadding padding = FilterPadding::zero_pad;

  void validate() const;
};

/// Weight applied per view and pixel during fan-beam backprojection.
/// distance: D^2 / U^2 with U = D - (x sin - y cos), the exact flat-detector weight.
/// detector: D^2 / (D^2 + r^2), a function of the detector coordinate only.
enum class BackprojectionWeight { distance, detector };

struct FbpOptions {
  bool fan_preweight = true;
  BackprojectionWeight weight = BackprojectionWeight::distance;
};

/// Band-limited ramp kernel including the sample spacing, for n = -half..half:
/// k[0] = 1/(4 tau), k[n] = -1/(n^2 pi^2 tau) for odd n, 0 otherwise.
std::vector<double> ramp_kernel(std::size_t half, double tau);

/// Scales each detector column by D / sqrt(D^2 + r^2). No-op for parallel beams.
Sinogram fan_preweight(const Sinogram& s);

Sinogram filter_projections(const Sinogram& s, const FilterSpec& f);

/// Riemann sum over views of the weighted, linearly interpolated filtered rows,
/// scaled by the angular step. Pixels projecting outside the detector get nothing.
ImageGrid fan_backproject(const Sinogram& q, const FanBeamGeometry& g, const ImageShape& shape,
                          BackprojectionWeight weight = BackprojectionWeight::distance);

/// Pre-weight, filter, backproject, and divide by the scan redundancy (range / pi).
ImageGrid fbp_reconstruct(const Sinogram& s, const FanBeamGeometry& g, const FilterSpec& f,
                          const ImageShape& shape, const FbpOptions& opts = {});

/// Detector coordinate of pixel (x, y) at angle theta for source distance D.
inline double fan_detector_coordinate(double x, double y, double theta, double D) {
  const double s = std::sin(theta);
  const double c = std::cos(theta);
  return D * (x * c + y * s) / (D - (x * s - y * c));
}

}  // namespace stride
