#pragma once

#include <string>

#include "stride/array2d.hpp"
#include "stride/geometry.hpp"

namespace stride::io {

/// Raised for unreadable or malformed files.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// "IMGF nx ny\n" followed by ny * nx little-endian float32, row-major.
void write_imgf(const std::string& path, const Array2D& values);
Array2D read_imgf(const std::string& path);

/// "SGRAM n_views n_dets\n" followed by n_views * n_dets little-endian float32.
void write_sgram(const std::string& path, const Array2D& values);
Array2D read_sgram(const std::string& path);

/// `path` with its extension replaced by ".geom".
std::string geometry_path(const std::string& sinogram_path);
void write_geometry(const std::string& path, const FanBeamGeometry& g);
FanBeamGeometry read_geometry(const std::string& path);

/// Sinogram plus its adjacent .geom file.
void write_sinogram(const std::string& path, const Sinogram& s);
Sinogram read_sinogram(const std::string& path);

/// 8-bit binary PGM scaled so the largest value maps to 255 (negatives clip to 0).
void write_pgm(const std::string& path, const Array2D& values);

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);

}  // namespace stride::io
