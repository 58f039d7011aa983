#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace stride {

/// Raised when two arrays (or an array and a geometry) disagree on shape.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an iterative stage produces a non-finite state.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense row-major 2-D array of doubles.
class Array2D {
 public:
  Array2D() = default;
  Array2D(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Array2D(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> flat() noexcept { return data_; }
  std::span<const double> flat() const noexcept { return data_; }
  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }

  bool same_shape(const Array2D& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  bool all_finite() const noexcept;
  void fill(double v);

  Array2D& operator+=(const Array2D& o);
  Array2D& operator-=(const Array2D& o);
  Array2D& operator*=(double s);

  bool operator==(const Array2D& o) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Array2D operator+(Array2D a, const Array2D& b);
Array2D operator-(Array2D a, const Array2D& b);
Array2D operator*(double s, Array2D a);

/// y += a * x
void axpy(double a, const Array2D& x, Array2D& y);

double dot(const Array2D& a, const Array2D& b);
double sum_squares(const Array2D& a);
double max_abs(const Array2D& a);
double max_abs_diff(const Array2D& a, const Array2D& b);

/// Throws ShapeError naming `what` unless the shapes agree.
void require_same_shape(const Array2D& a, const Array2D& b, const std::string& what);

}  // namespace stride
