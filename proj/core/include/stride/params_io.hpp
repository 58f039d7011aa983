#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "stride/tinynet.hpp"

namespace stride {

/// "STRDNET1", uint32 layer count, then per layer: uint32 ndim, ndim x uint32 dims,
/// prod(dims) little-endian float64 values.
void write_tensors(std::ostream& os, const std::vector<Tensor>& layers);
std::vector<Tensor> read_tensors(std::istream& is);

void save_tensors(const std::string& path, const std::vector<Tensor>& layers);
std::vector<Tensor> load_tensors(const std::string& path);

}  // namespace stride
