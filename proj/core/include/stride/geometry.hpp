#pragma once

#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "stride/array2d.hpp"

namespace stride {

enum class BeamKind { fan, parallel };

/// Circular scan with a flat detector. Angles are start + i * (end - start) / n_views.
///
/// Convention: at angle theta the source sits at D * (sin theta, -cos theta) and the
/// detector axis points along (cos theta, sin theta). A point (x, y) then lands on
/// the iso-centre detector coordinate r = D (x cos + y sin) / (D - (x sin - y cos)).
struct FanBeamGeometry {
  double source_to_center = 128.0;    // mm
  double center_to_detector = 128.0;  // mm
  std::size_t n_views = 180;
  std::size_t n_detectors = 128;
  double detector_width = 132.16;  // mm, measured on the physical detector
  double angle_start = 0.0;
  double angle_end = 2.0 * std::numbers::pi;
  BeamKind beam = BeamKind::fan;

  /// Throws std::invalid_argument on non-positive lengths, zero counts or an empty range.
  void validate() const;

  double angular_range() const noexcept { return angle_end - angle_start; }
  double angle_step() const noexcept { return angular_range() / static_cast<double>(n_views); }
  double angle(std::size_t i) const noexcept {
    return angle_start + static_cast<double>(i) * angle_step();
  }
  double detector_spacing() const noexcept {
    return detector_width / static_cast<double>(n_detectors);
  }
  /// Detector pitch scaled back to the rotation centre (equals the pitch for parallel beams).
  double iso_spacing() const noexcept;
  /// Centre of detector element d on the iso-centre axis.
  double iso_coordinate(std::size_t d) const noexcept {
    return (static_cast<double>(d) - 0.5 * static_cast<double>(n_detectors - 1)) * iso_spacing();
  }
  bool full_scan() const noexcept;

  std::string to_text() const;
  static FanBeamGeometry from_text(const std::string& text);

  bool operator==(const FanBeamGeometry&) const = default;
};

/// 40 cm / 40 cm / 41.3 cm scanner scaled by 0.32, 2 pi coverage.
FanBeamGeometry desk_geometry(std::size_t n_views = 180, std::size_t n_detectors = 128);

struct ImageShape {
  std::size_t nx = 64;
  std::size_t ny = 64;
  double pixel_size = 1.0;  // mm

  void validate() const;
  bool operator==(const ImageShape&) const = default;
};

/// Square field of view of `fov_mm` sampled on n x n pixels.
ImageShape desk_image_shape(std::size_t n = 64, double fov_mm = 64.0);

struct ImageGrid {
  ImageShape shape;
  Array2D values;  // ny rows, nx cols

  ImageGrid() = default;
  explicit ImageGrid(const ImageShape& s) : shape(s), values(s.ny, s.nx) {}
  ImageGrid(const ImageShape& s, Array2D v);

  std::size_t nx() const noexcept { return shape.nx; }
  std::size_t ny() const noexcept { return shape.ny; }
  double pixel_size() const noexcept { return shape.pixel_size; }
  void validate() const;
};

struct Sinogram {
  FanBeamGeometry geometry;
  Array2D values;  // n_views rows, n_detectors cols

  Sinogram() = default;
  explicit Sinogram(const FanBeamGeometry& g) : geometry(g), values(g.n_views, g.n_detectors) {}
  Sinogram(const FanBeamGeometry& g, Array2D v);

  std::size_t n_views() const noexcept { return geometry.n_views; }
  std::size_t n_detectors() const noexcept { return geometry.n_detectors; }
  void validate() const;
};

/// Per-view keep pattern; view i is active when i % interval == 0.
struct SparseMask {
  std::size_t interval = 1;
  std::vector<bool> active;

  std::size_t n_views() const noexcept { return active.size(); }
  std::size_t count_active() const noexcept;
  std::vector<std::size_t> active_indices() const;
};

SparseMask make_sparse_mask(std::size_t n_views, std::size_t r);

Array2D apply_mask(const Array2D& values, const SparseMask& m);
Sinogram apply_mask(const Sinogram& s, const SparseMask& m);

/// The active rows as a standalone sinogram over the matching sub-sampled geometry.
Sinogram extract_active_views(const Sinogram& s, const SparseMask& m);

}  // namespace stride
