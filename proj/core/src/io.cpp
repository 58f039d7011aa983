#include "stride/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace stride::io {

namespace {

constexpr std::size_t kMaxDim = 1 << 16;

void write_array(const std::string& path, const char* tag, const Array2D& a) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open " + path + " for writing");
  // IMGF stores columns first (nx ny); SGRAM stores rows first (views dets).
  const bool image = std::string(tag) == "IMGF";
  os << tag << ' ' << (image ? a.cols() : a.rows()) << ' ' << (image ? a.rows() : a.cols()) << '\n';
  std::string buf(a.size() * 4, '\0');
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(a.data()[i]));
    for (int k = 0; k < 4; ++k) buf[4 * i + static_cast<std::size_t>(k)] = static_cast<char>((bits >> (8 * k)) & 0xff);
  }
  os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!os) throw FormatError("write failed: " + path);
}

Array2D read_array(const std::string& path, const char* tag) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open " + path);
  std::string header;
  if (!std::getline(is, header)) throw FormatError(path + ": missing header");
  std::istringstream hs(header);
  std::string got;
  long long d0 = -1, d1 = -1;
  hs >> got >> d0 >> d1;
  std::string extra;
  if (got != tag || hs.fail() || (hs >> extra)) {
    throw FormatError(path + ": expected '" + std::string(tag) + " <dim> <dim>' header");
  }
  if (d0 < 1 || d1 < 1 || d0 > static_cast<long long>(kMaxDim) || d1 > static_cast<long long>(kMaxDim)) {
    throw FormatError(path + ": bad dimensions");
  }
  const bool image = std::string(tag) == "IMGF";
  const auto rows = static_cast<std::size_t>(image ? d1 : d0);
  const auto cols = static_cast<std::size_t>(image ? d0 : d1);
  std::string buf(rows * cols * 4, '\0');
  if (!is.read(buf.data(), static_cast<std::streamsize>(buf.size()))) {
    throw FormatError(path + ": truncated payload");
  }
  if (is.peek() != std::char_traits<char>::eof()) throw FormatError(path + ": trailing bytes");
  Array2D a(rows, cols);
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::uint32_t bits = 0;
    for (int k = 0; k < 4; ++k) {
      bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[4 * i + static_cast<std::size_t>(k)])) << (8 * k);
    }
    a.data()[i] = static_cast<double>(std::bit_cast<float>(bits));
  }
  return a;
}

}  // namespace

void write_imgf(const std::string& path, const Array2D& values) { write_array(path, "IMGF", values); }
Array2D read_imgf(const std::string& path) { return read_array(path, "IMGF"); }
void write_sgram(const std::string& path, const Array2D& values) { write_array(path, "SGRAM", values); }
Array2D read_sgram(const std::string& path) { return read_array(path, "SGRAM"); }

std::string geometry_path(const std::string& sinogram_path) {
  return std::filesystem::path(sinogram_path).replace_extension(".geom").string();
}

void write_geometry(const std::string& path, const FanBeamGeometry& g) { write_text(path, g.to_text()); }

FanBeamGeometry read_geometry(const std::string& path) {
  try {
    return FanBeamGeometry::from_text(read_text(path));
  } catch (const std::invalid_argument& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void write_sinogram(const std::string& path, const Sinogram& s) {
  write_sgram(path, s.values);
  write_geometry(geometry_path(path), s.geometry);
}

Sinogram read_sinogram(const std::string& path) {
  Array2D v = read_sgram(path);
  const FanBeamGeometry g = read_geometry(geometry_path(path));
  if (v.rows() != g.n_views || v.cols() != g.n_detectors) {
    throw ShapeError(path + ": sinogram shape does not match its geometry");
  }
  return Sinogram(g, std::move(v));
}

void write_pgm(const std::string& path, const Array2D& values) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open " + path + " for writing");
  double peak = 0.0;
  for (double v : values.flat()) peak = std::max(peak, v);
  os << "P5\n" << values.cols() << ' ' << values.rows() << "\n255\n";
  for (double v : values.flat()) {
    const double s = peak > 0.0 ? std::clamp(v / peak, 0.0, 1.0) : 0.0;
    os.put(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * s))));
  }
  if (!os) throw FormatError("write failed: " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw FormatError("cannot open " + path + " for writing");
  os << text;
  if (!os) throw FormatError("write failed: " + path);
}

}  // namespace stride::io
