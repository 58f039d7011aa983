#include "stride/array2d.hpp"

#include <algorithm>
#include <cmath>

namespace stride {

Array2D::Array2D(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw ShapeError("Array2D: data length " + std::to_string(data_.size()) +
                     " does not match " + std::to_string(rows_) + "x" + std::to_string(cols_));
  }
}

bool Array2D::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void Array2D::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

Array2D& Array2D::operator+=(const Array2D& o) {
  require_same_shape(*this, o, "Array2D::operator+=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

Array2D& Array2D::operator-=(const Array2D& o) {
  require_same_shape(*this, o, "Array2D::operator-=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

Array2D& Array2D::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Array2D operator+(Array2D a, const Array2D& b) { return a += b; }
Array2D operator-(Array2D a, const Array2D& b) { return a -= b; }
Array2D operator*(double s, Array2D a) { return a *= s; }

void axpy(double a, const Array2D& x, Array2D& y) {
  require_same_shape(x, y, "axpy");
  auto xs = x.flat();
  auto ys = y.flat();
  for (std::size_t i = 0; i < xs.size(); ++i) ys[i] += a * xs[i];
}

double dot(const Array2D& a, const Array2D& b) {
  require_same_shape(a, b, "dot");
  double s = 0.0;
  auto as = a.flat();
  auto bs = b.flat();
  for (std::size_t i = 0; i < as.size(); ++i) s += as[i] * bs[i];
  return s;
}

double sum_squares(const Array2D& a) {
  double s = 0.0;
  for (double v : a.flat()) s += v * v;
  return s;
}

double max_abs(const Array2D& a) {
  double m = 0.0;
  for (double v : a.flat()) m = std::max(m, std::abs(v));
  return m;
}

double max_abs_diff(const Array2D& a, const Array2D& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  auto as = a.flat();
  auto bs = b.flat();
  for (std::size_t i = 0; i < as.size(); ++i) m = std::max(m, std::abs(as[i] - bs[i]));
  return m;
}

void require_same_shape(const Array2D& a, const Array2D& b, const std::string& what) {
  if (!a.same_shape(b)) {
    throw ShapeError(what + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()));
  }
}

}  // namespace stride
