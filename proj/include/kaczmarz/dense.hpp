#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <initializer_list>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "kaczmarz/error.hpp"

namespace kaczmarz {

using Vector = std::vector<double>;

/// Row-major dense matrix of doubles. Rows are handed out as spans so callers
/// never depend on the storage layout beyond "row i is contiguous".
class DenseMatrix {
 public:
  DenseMatrix() = default;

  DenseMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), entries_(rows * cols, 0.0) {}

  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
      : rows_(rows), cols_(cols), entries_(std::move(entries)) {
    detail::require(entries_.size() == rows * cols, ErrorCode::DimensionMismatch,
                    "entry count " + std::to_string(entries_.size()) + " != " +
                        std::to_string(rows) + "x" + std::to_string(cols));
  }

  static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.begin()->size();
    std::vector<double> entries;
    entries.reserve(r * c);
    for (const auto& row : rows) {
      detail::require(row.size() == c, ErrorCode::DimensionMismatch, "ragged row list");
      entries.insert(entries.end(), row.begin(), row.end());
    }
    return DenseMatrix(r, c, std::move(entries));
  }

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix out(n, n);
    for (std::size_t i = 0; i < n; ++i) out(i, i) = 1.0;
    return out;
  }

  static DenseMatrix diagonal(std::span<const double> values) {
    DenseMatrix out(values.size(), values.size());
    for (std::size_t i = 0; i < values.size(); ++i) out(i, i) = values[i];
    return out;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return entries_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return entries_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }

  std::span<const double> row(std::size_t i) const {
    return {entries_.data() + i * cols_, cols_};
  }
  std::span<double> row(std::size_t i) { return {entries_.data() + i * cols_, cols_}; }

  Vector column(std::size_t j) const {
    Vector out(rows_);
    for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
    return out;
  }

  std::span<const double> entries() const noexcept { return entries_; }
  std::span<double> entries() noexcept { return entries_; }

  DenseMatrix transpose() const {
    DenseMatrix out(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
    return out;
  }

  /// First `count` columns.
  DenseMatrix leading_columns(std::size_t count) const {
    detail::require(count <= cols_, ErrorCode::DimensionMismatch, "too many columns requested");
    DenseMatrix out(rows_, count);
    for (std::size_t i = 0; i < rows_; ++i)
      std::copy_n(entries_.data() + i * cols_, count, out.entries_.data() + i * count);
    return out;
  }

  DenseMatrix select_rows(std::span<const std::size_t> indices) const {
    DenseMatrix out(indices.size(), cols_);
    for (std::size_t k = 0; k < indices.size(); ++k) {
      detail::require(indices[k] < rows_, ErrorCode::IndexOutOfRange,
                      "row " + std::to_string(indices[k]) + " out of range");
      std::copy_n(entries_.data() + indices[k] * cols_, cols_, out.entries_.data() + k * cols_);
    }
    return out;
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (double v : entries_) s += v * v;
    return std::sqrt(s);
  }

  double max_abs() const {
    double s = 0.0;
    for (double v : entries_) s = std::max(s, std::abs(v));
    return s;
  }

  bool all_finite() const {
    return std::all_of(entries_.begin(), entries_.end(), [](double v) { return std::isfinite(v); });
  }

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> entries_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double squared_norm(std::span<const double> a) { return dot(a, a); }
inline double norm2(std::span<const double> a) { return std::sqrt(squared_norm(a)); }

inline double max_abs(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s = std::max(s, std::abs(v));
  return s;
}

/// y += alpha * x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline Vector subtract(std::span<const double> a, std::span<const double> b) {
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

inline double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

/// A * x
inline Vector multiply(const DenseMatrix& a, std::span<const double> x) {
  detail::require(x.size() == a.cols(), ErrorCode::DimensionMismatch,
                  "vector length " + std::to_string(x.size()) + " != " + std::to_string(a.cols()));
  Vector out(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) out[i] = dot(a.row(i), x);
  return out;
}

/// A^T * y
inline Vector multiply_transpose(const DenseMatrix& a, std::span<const double> y) {
  detail::require(y.size() == a.rows(), ErrorCode::DimensionMismatch,
                  "vector length " + std::to_string(y.size()) + " != " + std::to_string(a.rows()));
  Vector out(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) axpy(y[i], a.row(i), out);
  return out;
}

inline DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b) {
  detail::require(a.cols() == b.rows(), ErrorCode::DimensionMismatch, "inner dimensions differ");
  DenseMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto dst = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) axpy(a(i, k), b.row(k), dst);
  }
  return out;
}

/// Vertical concatenation [top; bottom].
inline DenseMatrix stack_rows(const DenseMatrix& top, const DenseMatrix& bottom) {
  detail::require(top.cols() == bottom.cols(), ErrorCode::DimensionMismatch,
                  "column counts differ when stacking");
  std::vector<double> entries(top.entries().begin(), top.entries().end());
  entries.insert(entries.end(), bottom.entries().begin(), bottom.entries().end());
  return DenseMatrix(top.rows() + bottom.rows(), top.cols(), std::move(entries));
}

inline Vector row_squared_norms(const DenseMatrix& a) {
  Vector out(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) out[i] = squared_norm(a.row(i));
  return out;
}

/// Shortest round-trippable form is not required; 17 significant digits is.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_csv(std::ostream& out, const DenseMatrix& a) {
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (j) out << ',';
      out << format_double(a(i, j));
    }
    out << '\n';
  }
}

}  // namespace kaczmarz
