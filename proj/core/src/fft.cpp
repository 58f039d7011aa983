#include "stride/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <utility>

namespace stride::fft {

namespace {

// fftw planning is not thread-safe; execution with the new-array interface is.
std::mutex g_plan_mutex;

struct PlanPair {
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;
};

struct PlanCache {
  std::map<std::pair<std::size_t, std::size_t>, PlanPair> plans;
  ~PlanCache() {
    for (auto& [key, p] : plans) {
      fftw_destroy_plan(p.fwd);
      fftw_destroy_plan(p.inv);
    }
  }
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};
using RealBuf = std::unique_ptr<double, FftwFree>;
using CplxBuf = std::unique_ptr<fftw_complex, FftwFree>;

RealBuf alloc_real(std::size_t n) { return RealBuf(fftw_alloc_real(n)); }
CplxBuf alloc_cplx(std::size_t n) { return CplxBuf(fftw_alloc_complex(n)); }

// rows == 0 marks a 1-D transform of length cols.
const PlanPair& plans_for(std::size_t rows, std::size_t cols) {
  std::lock_guard<std::mutex> lock(g_plan_mutex);
  auto& c = cache();
  auto it = c.plans.find({rows, cols});
  if (it != c.plans.end()) return it->second;
  const std::size_t real_n = (rows == 0 ? 1 : rows) * cols;
  const std::size_t cplx_n = (rows == 0 ? 1 : rows) * (cols / 2 + 1);
  auto r = alloc_real(real_n);
  auto z = alloc_cplx(cplx_n);
  PlanPair p;
  if (rows == 0) {
    p.fwd = fftw_plan_dft_r2c_1d(static_cast<int>(cols), r.get(), z.get(), FFTW_ESTIMATE);
    p.inv = fftw_plan_dft_c2r_1d(static_cast<int>(cols), z.get(), r.get(), FFTW_ESTIMATE);
  } else {
    p.fwd = fftw_plan_dft_r2c_2d(static_cast<int>(rows), static_cast<int>(cols), r.get(), z.get(),
                                 FFTW_ESTIMATE);
    p.inv = fftw_plan_dft_c2r_2d(static_cast<int>(rows), static_cast<int>(cols), z.get(), r.get(),
                                 FFTW_ESTIMATE);
  }
  return c.plans.emplace(std::make_pair(rows, cols), p).first->second;
}

}  // namespace

HalfSpectrum forward(const Array2D& x) {
  const auto& p = plans_for(x.rows(), x.cols());
  HalfSpectrum s;
  s.rows = x.rows();
  s.cols = x.cols();
  const std::size_t nz = s.rows * s.half_cols();
  auto r = alloc_real(x.size());
  auto z = alloc_cplx(nz);
  std::memcpy(r.get(), x.data(), x.size() * sizeof(double));
  fftw_execute_dft_r2c(p.fwd, r.get(), z.get());
  s.bins.resize(nz);
  for (std::size_t i = 0; i < nz; ++i) s.bins[i] = {z.get()[i][0], z.get()[i][1]};
  return s;
}

Array2D inverse(const HalfSpectrum& s) {
  const auto& p = plans_for(s.rows, s.cols);
  const std::size_t nz = s.rows * s.half_cols();
  auto r = alloc_real(s.rows * s.cols);
  auto z = alloc_cplx(nz);
  for (std::size_t i = 0; i < nz; ++i) {
    z.get()[i][0] = s.bins[i].real();
    z.get()[i][1] = s.bins[i].imag();
  }
  fftw_execute_dft_c2r(p.inv, z.get(), r.get());
  Array2D out(s.rows, s.cols);
  const double norm = 1.0 / static_cast<double>(s.rows * s.cols);
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = r.get()[i] * norm;
  return out;
}

Array2D apply_response(const Array2D& x, const Array2D& response) {
  require_same_shape(x, response, "fft::apply_response");
  auto s = forward(x);
  for (std::size_t r = 0; r < s.rows; ++r) {
    for (std::size_t k = 0; k < s.half_cols(); ++k) s.at(r, k) *= response(r, k);
  }
  return inverse(s);
}

std::vector<Complex> forward_1d(const std::vector<double>& x) {
  const auto& p = plans_for(0, x.size());
  const std::size_t nz = x.size() / 2 + 1;
  auto r = alloc_real(x.size());
  auto z = alloc_cplx(nz);
  std::memcpy(r.get(), x.data(), x.size() * sizeof(double));
  fftw_execute_dft_r2c(p.fwd, r.get(), z.get());
  std::vector<Complex> out(nz);
  for (std::size_t i = 0; i < nz; ++i) out[i] = {z.get()[i][0], z.get()[i][1]};
  return out;
}

std::vector<double> inverse_1d(const std::vector<Complex>& s, std::size_t n) {
  const auto& p = plans_for(0, n);
  auto r = alloc_real(n);
  auto z = alloc_cplx(n / 2 + 1);
  for (std::size_t i = 0; i < n / 2 + 1; ++i) {
    z.get()[i][0] = s[i].real();
    z.get()[i][1] = s[i].imag();
  }
  fftw_execute_dft_c2r(p.inv, z.get(), r.get());
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = r.get()[i] / static_cast<double>(n);
  return out;
}

}  // namespace stride::fft
