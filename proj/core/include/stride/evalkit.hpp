#pragma once

#include <vector>

#include "stride/array2d.hpp"
#include "stride/geometry.hpp"
#include "stride/rng.hpp"

namespace stride {

/// Ellipse in normalised coordinates, where the image spans [-1, 1] on both axes.
struct Ellipse {
  double density;
  double a, b;    // semi-axes
  double x0, y0;  // centre
  double theta;   // rotation, radians
};

/// The 10-ellipse modified Shepp-Logan table (high-contrast variant).
std::vector<Ellipse> shepp_logan_table();

/// Perturbed copy of the standard table: the eight inner ellipses get density x(1 +/- 0.3),
/// centre offsets up to +/- 0.03 and semi-axes x(1 +/- 0.15); the skull is kept.
std::vector<Ellipse> random_shepp_logan_table(Rng& rng);

/// Sums ellipse densities at pixel centres, then clips to [0, 1].
ImageGrid rasterize_ellipses(const std::vector<Ellipse>& table, const ImageShape& shape);

/// Modified Shepp-Logan phantom on a 64 mm field of view. nx, ny >= 16.
ImageGrid shepp_logan(std::size_t nx, std::size_t ny);
ImageGrid shepp_logan(const ImageShape& shape);

double mse(const Array2D& a, const Array2D& b);
/// 10 log10(range^2 / mse); +infinity for identical inputs.
double psnr(const Array2D& a, const Array2D& b, double data_range);
/// Mean SSIM over every fully contained 7x7 window (uniform weights, sample covariances).
double ssim(const Array2D& a, const Array2D& b, double data_range);
/// D_KL(hist(a) || hist(b)) on n_bins shared bins over the joint range, with 1e-12 added
/// to every bin probability before renormalising.
double kl_divergence(const Array2D& a, const Array2D& b, std::size_t n_bins = 64);

}  // namespace stride
