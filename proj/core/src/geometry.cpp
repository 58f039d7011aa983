#include "stride/geometry.hpp"

#include <charconv>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>

namespace stride {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size()) throw std::invalid_argument("geometry: bad number for " + key + ": " + v);
  return out;
}

std::size_t parse_count(const std::string& key, const std::string& v) {
  std::size_t out = 0;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc{} || ptr != end) {
    throw std::invalid_argument("geometry: bad count for " + key + ": " + v);
  }
  return out;
}

}  // namespace

void FanBeamGeometry::validate() const {
  require(std::isfinite(source_to_center) && source_to_center > 0.0,
          "geometry: source_to_center must be > 0");
  require(std::isfinite(center_to_detector) && center_to_detector > 0.0,
          "geometry: center_to_detector must be > 0");
  require(std::isfinite(detector_width) && detector_width > 0.0,
          "geometry: detector_width must be > 0");
  require(n_views >= 1, "geometry: n_views must be >= 1");
  require(n_detectors >= 1, "geometry: n_detectors must be >= 1");
  require(std::isfinite(angle_start) && std::isfinite(angle_end) && angle_end > angle_start,
          "geometry: angular range must be non-empty");
}

double FanBeamGeometry::iso_spacing() const noexcept {
  if (beam == BeamKind::parallel) return detector_spacing();
  return detector_spacing() * source_to_center / (source_to_center + center_to_detector);
}

bool FanBeamGeometry::full_scan() const noexcept {
  return std::abs(angular_range() - 2.0 * std::numbers::pi) < 1e-9;
}

std::string FanBeamGeometry::to_text() const {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "sod_mm=" << source_to_center << '\n'
     << "cdd_mm=" << center_to_detector << '\n'
     << "n_views=" << n_views << '\n'
     << "n_detectors=" << n_detectors << '\n'
     << "det_width_mm=" << detector_width << '\n'
     << "angle_start_rad=" << angle_start << '\n'
     << "angle_end_rad=" << angle_end << '\n';
  if (beam == BeamKind::parallel) os << "beam=parallel\n";
  return os.str();
}

FanBeamGeometry FanBeamGeometry::from_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("geometry: expected key=value: " + line);
    const auto key = trim(line.substr(0, eq));
    if (kv.count(key)) throw std::invalid_argument("geometry: duplicate key " + key);
    kv[key] = trim(line.substr(eq + 1));
  }
  FanBeamGeometry g;
  for (const auto& [k, v] : kv) {
    if (k == "sod_mm") g.source_to_center = parse_double(k, v);
    else if (k == "cdd_mm") g.center_to_detector = parse_double(k, v);
    else if (k == "n_views") g.n_views = parse_count(k, v);
    else if (k == "n_detectors") g.n_detectors = parse_count(k, v);
    else if (k == "det_width_mm") g.detector_width = parse_double(k, v);
    else if (k == "angle_start_rad") g.angle_start = parse_double(k, v);
    else if (k == "angle_end_rad") g.angle_end = parse_double(k, v);
    else if (k == "beam") {
      if (v == "fan") g.beam = BeamKind::fan;
      else if (v == "parallel") g.beam = BeamKind::parallel;
      else throw std::invalid_argument("geometry: unknown beam " + v);
    } else {
      throw std::invalid_argument("geometry: unknown key " + k);
    }
  }
  for (const char* k : {"sod_mm", "cdd_mm", "n_views", "n_detectors", "det_width_mm",
                        "angle_start_rad", "angle_end_rad"}) {
    if (!kv.count(k)) throw std::invalid_argument(std::string("geometry: missing key ") + k);
  }
  g.validate();
  return g;
}

FanBeamGeometry desk_geometry(std::size_t n_views, std::size_t n_detectors) {
  constexpr double scale = 0.32;
  FanBeamGeometry g;
  g.source_to_center = 400.0 * scale;
  g.center_to_detector = 400.0 * scale;
  g.detector_width = 413.0 * scale;
  g.n_views = n_views;
  g.n_detectors = n_detectors;
  g.validate();
  return g;
}

void ImageShape::validate() const {
  require(nx >= 1 && ny >= 1, "image: nx, ny must be >= 1");
  require(std::isfinite(pixel_size) && pixel_size > 0.0, "image: pixel_size must be > 0");
}

ImageShape desk_image_shape(std::size_t n, double fov_mm) {
  ImageShape s{n, n, fov_mm / static_cast<double>(n)};
  s.validate();
  return s;
}

ImageGrid::ImageGrid(const ImageShape& s, Array2D v) : shape(s), values(std::move(v)) {
  if (values.rows() != s.ny || values.cols() != s.nx) {
    throw ShapeError("image: values must be ny x nx");
  }
}

void ImageGrid::validate() const {
  shape.validate();
  if (values.rows() != shape.ny || values.cols() != shape.nx) {
    throw ShapeError("image: values must be ny x nx");
  }
  require(values.all_finite(), "image: non-finite value");
}

Sinogram::Sinogram(const FanBeamGeometry& g, Array2D v) : geometry(g), values(std::move(v)) {
  if (values.rows() != g.n_views || values.cols() != g.n_detectors) {
    throw ShapeError("sinogram: values must be n_views x n_detectors");
  }
}

void Sinogram::validate() const {
  geometry.validate();
  if (values.rows() != geometry.n_views || values.cols() != geometry.n_detectors) {
    throw ShapeError("sinogram: values must be n_views x n_detectors");
  }
  require(values.all_finite(), "sinogram: non-finite value");
}

std::size_t SparseMask::count_active() const noexcept {
  std::size_t n = 0;
  for (bool a : active) n += a ? 1 : 0;
  return n;
}

std::vector<std::size_t> SparseMask::active_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < active.size(); ++i) {
    if (active[i]) out.push_back(i);
  }
  return out;
}

SparseMask make_sparse_mask(std::size_t n_views, std::size_t r) {
  require(n_views >= 1, "mask: n_views must be >= 1");
  require(r >= 1 && r <= n_views, "mask: interval must satisfy 1 <= r <= n_views");
  SparseMask m;
  m.interval = r;
  m.active.resize(n_views);
  for (std::size_t i = 0; i < n_views; ++i) m.active[i] = (i % r == 0);
  return m;
}

Array2D apply_mask(const Array2D& values, const SparseMask& m) {
  if (values.rows() != m.n_views()) throw ShapeError("mask: view count mismatch");
  Array2D out(values.rows(), values.cols());
  for (std::size_t i = 0; i < values.rows(); ++i) {
    if (!m.active[i]) continue;
    auto src = values.row(i);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

Sinogram apply_mask(const Sinogram& s, const SparseMask& m) {
  return Sinogram(s.geometry, apply_mask(s.values, m));
}

Sinogram extract_active_views(const Sinogram& s, const SparseMask& m) {
  if (s.n_views() != m.n_views()) throw ShapeError("mask: view count mismatch");
  const auto idx = m.active_indices();
  FanBeamGeometry g = s.geometry;
  g.n_views = idx.size();
  g.angle_end = g.angle_start +
                static_cast<double>(idx.size() * m.interval) * s.geometry.angle_step();
  Sinogram out(g);
  for (std::size_t k = 0; k < idx.size(); ++k) {
    auto src = s.values.row(idx[k]);
    std::copy(src.begin(), src.end(), out.values.row(k).begin());
  }
  return out;
}

}  // namespace stride
