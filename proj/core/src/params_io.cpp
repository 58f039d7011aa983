#include "stride/params_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace stride {

namespace {

constexpr char kMagic[8] = {'S', 'T', 'R', 'D', 'N', 'E', 'T', '1'};
constexpr std::uint32_t kMaxDims = 8;
constexpr std::uint64_t kMaxElements = 1ULL << 28;

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 4);
}

void put_f64(std::ostream& os, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) throw std::runtime_error("STRDNET1: truncated file");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& is) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) throw std::runtime_error("STRDNET1: truncated file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return std::bit_cast<double>(v);
}

}  // namespace

void write_tensors(std::ostream& os, const std::vector<Tensor>& layers) {
  os.write(kMagic, sizeof(kMagic));
  put_u32(os, static_cast<std::uint32_t>(layers.size()));
  for (const auto& t : layers) {
    std::uint64_t n = 1;
    for (auto d : t.shape) n *= d;
    if (n != t.data.size()) throw ShapeError("STRDNET1: tensor data does not match its shape");
    put_u32(os, static_cast<std::uint32_t>(t.shape.size()));
    for (auto d : t.shape) put_u32(os, d);
    for (double v : t.data) put_f64(os, v);
  }
  if (!os) throw std::runtime_error("STRDNET1: write failed");
}

std::vector<Tensor> read_tensors(std::istream& is) {
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) {
    throw std::runtime_error("STRDNET1: bad magic");
  }
  const std::uint32_t count = get_u32(is);
  std::vector<Tensor> out;
  for (std::uint32_t l = 0; l < count; ++l) {
    Tensor t;
    const std::uint32_t nd = get_u32(is);
    if (nd > kMaxDims) throw std::runtime_error("STRDNET1: too many dimensions");
    std::uint64_t n = 1;
    for (std::uint32_t k = 0; k < nd; ++k) {
      t.shape.push_back(get_u32(is));
      n *= t.shape.back();
      if (n > kMaxElements) throw std::runtime_error("STRDNET1: layer too large");
    }
    t.data.resize(n);
    for (auto& v : t.data) v = get_f64(is);
    out.push_back(std::move(t));
  }
  return out;
}

void save_tensors(const std::string& path, const std::vector<Tensor>& layers) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_tensors(os, layers);
}

std::vector<Tensor> load_tensors(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_tensors(is);
}

}  // namespace stride
