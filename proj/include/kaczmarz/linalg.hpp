#pragma once

#include <cmath>
#include <utility>

#include "kaczmarz/dense.hpp"
#include "kaczmarz/error.hpp"

namespace kaczmarz {

/// Householder QR of an m x n matrix with m >= n.
///
/// Reflector k is H_k = I - 2 v_k v_k^T with v_k supported on rows k..m-1.
/// Q = H_0 H_1 ... H_{p-1}; R is the upper triangle left in the working copy.
/// A zero column below the diagonal produces the identity reflector, so a
/// rank-deficient input factors fine and shows up as a zero on diag(R).
class HouseholderQr {
 public:
  explicit HouseholderQr(DenseMatrix a) : work_(std::move(a)) {
    const std::size_t m = work_.rows();
    const std::size_t n = work_.cols();
    detail::require(m >= n && n >= 1, ErrorCode::DimensionMismatch,
                    "QR needs rows >= cols >= 1, got " + std::to_string(m) + "x" + std::to_string(n));
    const std::size_t steps = std::min(m - 1, n);
    reflectors_.reserve(steps);
    Vector scratch(n);
    for (std::size_t k = 0; k < steps; ++k) {
      Vector v(m - k);
      double col_norm_sq = 0.0;
      for (std::size_t i = k; i < m; ++i) {
        v[i - k] = work_(i, k);
        col_norm_sq += v[i - k] * v[i - k];
      }
      const double col_norm = std::sqrt(col_norm_sq);
      if (col_norm == 0.0) {
        reflectors_.emplace_back();
        continue;
      }
      const double alpha = v[0] >= 0.0 ? -col_norm : col_norm;
      v[0] -= alpha;
      const double v_norm = norm2(v);
      for (double& x : v) x /= v_norm;

      // work[k:, k:] -= 2 v (v^T work[k:, k:])
      std::fill(scratch.begin(), scratch.end(), 0.0);
      for (std::size_t i = k; i < m; ++i) {
        const double vi = v[i - k];
        const auto row = work_.row(i);
        for (std::size_t j = k; j < n; ++j) scratch[j] += vi * row[j];
      }
      for (std::size_t i = k; i < m; ++i) {
        const double vi = 2.0 * v[i - k];
        auto row = work_.row(i);
        for (std::size_t j = k; j < n; ++j) row[j] -= vi * scratch[j];
      }
      for (std::size_t i = k + 1; i < m; ++i) work_(i, k) = 0.0;
      work_(k, k) = alpha;
      reflectors_.push_back(std::move(v));
    }
  }

  std::size_t rows() const noexcept { return work_.rows(); }
  std::size_t cols() const noexcept { return work_.cols(); }

  double r_diagonal(std::size_t i) const { return work_(i, i); }

  /// n x n upper-triangular factor.
  DenseMatrix r() const {
    const std::size_t n = cols();
    DenseMatrix out(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) out(i, j) = work_(i, j);
    return out;
  }

  /// First `count` columns of Q (count <= m). Q[:, :n] depends only on the
  /// first n input columns, so the thin and full factors agree bit for bit.
  DenseMatrix q(std::size_t count) const {
    const std::size_t m = rows();
    detail::require(count <= m, ErrorCode::DimensionMismatch, "Q has only m columns");
    DenseMatrix out(m, count);
    for (std::size_t j = 0; j < count; ++j) out(j, j) = 1.0;
    for (std::size_t k = reflectors_.size(); k-- > 0;) {
      const Vector& v = reflectors_[k];
      if (v.empty()) continue;
      // Columns j < k are e_j-derived with zeros on rows >= k: H_k leaves them.
      for (std::size_t j = std::min(k, count); j < count; ++j) {
        double s = 0.0;
        for (std::size_t i = k; i < m; ++i) s += v[i - k] * out(i, j);
        if (s == 0.0) continue;
        s *= 2.0;
        for (std::size_t i = k; i < m; ++i) out(i, j) -= s * v[i - k];
      }
    }
    return out;
  }

  DenseMatrix q() const { return q(rows()); }

  /// Q^T b
  Vector apply_qt(std::span<const double> b) const {
    detail::require(b.size() == rows(), ErrorCode::DimensionMismatch, "rhs length != rows");
    Vector y(b.begin(), b.end());
    for (std::size_t k = 0; k < reflectors_.size(); ++k) {
      const Vector& v = reflectors_[k];
      if (v.empty()) continue;
      double s = 0.0;
      for (std::size_t i = k; i < y.size(); ++i) s += v[i - k] * y[i];
      s *= 2.0;
      for (std::size_t i = k; i < y.size(); ++i) y[i] -= s * v[i - k];
    }
    return y;
  }

  /// Solves R x = y[:n] by back substitution; rank is checked against
  /// `pivot_tolerance` (absolute).
  Vector back_substitute(std::span<const double> y, double pivot_tolerance) const {
    const std::size_t n = cols();
    Vector x(n);
    for (std::size_t i = n; i-- > 0;) {
      const double d = work_(i, i);
      if (!(std::abs(d) > pivot_tolerance)) throw RankDeficientError(i, d);
      double s = y[i];
      for (std::size_t j = i + 1; j < n; ++j) s -= work_(i, j) * x[j];
      x[i] = s / d;
    }
    return x;
  }

  /// Solves R^T z = y by forward substitution (no rank check).
  Vector forward_substitute_transpose(std::span<const double> y) const {
    const std::size_t n = cols();
    Vector z(n);
    for (std::size_t i = 0; i < n; ++i) {
      double s = y[i];
      for (std::size_t j = 0; j < i; ++j) s -= work_(j, i) * z[j];
      z[i] = s / work_(i, i);
    }
    return z;
  }

 private:
  DenseMatrix work_;
  std::vector<Vector> reflectors_;
};

/// Relative pivot threshold for the least-squares rank check.
inline constexpr double kRankTolerance = 1e-13;

/// argmin_x ||A x - b||_2 through Householder QR.
inline Vector least_squares(const DenseMatrix& a, std::span<const double> b) {
  detail::require(b.size() == a.rows(), ErrorCode::DimensionMismatch,
                  "rhs length " + std::to_string(b.size()) + " != rows " + std::to_string(a.rows()));
  const double scale = a.frobenius_norm();
  HouseholderQr qr(a);
  const Vector y = qr.apply_qt(b);
  return qr.back_substitute(y, kRankTolerance * scale);
}

struct SingularPair {
  Vector vector;
  double sigma = 0.0;
};

/// Flips v so that its first non-negligible component is positive.
inline void canonicalize_sign(std::span<double> v) {
  const double scale = max_abs(v);
  for (double x : v) {
    if (std::abs(x) > 1e-12 * scale) {
      if (x < 0.0)
        for (double& y : v) y = -y;
      return;
    }
  }
}

/// Largest eigenvalue of A^T A by power iteration (a sigma_1^2 estimate).
inline double estimate_largest_eigenvalue(const DenseMatrix& a, std::size_t iterations = 60) {
  Vector v(a.cols(), 1.0 / std::sqrt(static_cast<double>(a.cols())));
  double lambda = 0.0;
  for (std::size_t it = 0; it < iterations; ++it) {
    Vector w = multiply_transpose(a, multiply(a, v));
    const double len = norm2(w);
    if (len == 0.0) return 0.0;
    lambda = len;
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = w[i] / len;
  }
  return lambda;
}

/// Smallest right singular vector of A by inverse iteration on A^T A + mu I.
///
/// The shifted Gram matrix is never formed: the QR factor of [A; sqrt(mu) I]
/// satisfies R^T R = A^T A + mu I, and each step solves with R^T then R.
/// Converged when ||A^T A v - sigma^2 v|| <= tol * sigma_1^2 and successive
/// iterates differ by at most 1e-12 (the residual test alone is loose when
/// sigma_1 / sigma_n is large).
inline SingularPair smallest_right_singular_vector(const DenseMatrix& a, double tol = 1e-10,
                                                   std::size_t max_iter = 500) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  detail::require(m >= n && n >= 1, ErrorCode::DimensionMismatch, "need rows >= cols >= 1");
  const double top = estimate_largest_eigenvalue(a);
  const double shift = 1e-15 * top;

  DenseMatrix augmented(m + n, n);
  std::copy(a.entries().begin(), a.entries().end(), augmented.entries().begin());
  for (std::size_t j = 0; j < n; ++j) augmented(m + j, j) = std::sqrt(shift);
  HouseholderQr qr(std::move(augmented));

  Vector v(n);
  for (std::size_t j = 0; j < n; ++j) v[j] = 1.0 / std::sqrt(static_cast<double>(n)) * (1.0 + 0.1 * j);
  {
    const double len = norm2(v);
    for (double& x : v) x /= len;
  }
  double residual = 0.0;
  for (std::size_t it = 1; it <= max_iter; ++it) {
    Vector z = qr.forward_substitute_transpose(v);
    Vector w = qr.back_substitute(z, 0.0);
    const double len = norm2(w);
    detail::require(std::isfinite(len) && len > 0.0, ErrorCode::NonFinite,
                    "inverse iteration produced a non-finite vector");
    double change = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double next = w[j] / len;
      change = std::max(change, std::abs(next - v[j]));
      v[j] = next;
    }

    const Vector av = multiply(a, v);
    const double sigma_sq = squared_norm(av);
    Vector g = multiply_transpose(a, av);
    axpy(-sigma_sq, v, g);
    residual = norm2(g);
    if (residual <= tol * top && change <= 1e-12) {
      canonicalize_sign(v);
      return {std::move(v), std::sqrt(sigma_sq)};
    }
  }
  throw ConvergenceError(max_iter, residual);
}

}  // namespace kaczmarz
