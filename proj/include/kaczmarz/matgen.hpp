#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <string>

#include "kaczmarz/dense.hpp"
#include "kaczmarz/linalg.hpp"
#include "kaczmarz/random.hpp"

namespace kaczmarz {

enum class Relation { Equality, LessEqual };

/// A = U diag(singular_values) V^T. `u` is either the full m x m factor or
/// just its first n columns, depending on how the system was generated.
struct SvdFactors {
  DenseMatrix u;
  Vector singular_values;
  DenseMatrix v;
};

struct LinearSystem {
  DenseMatrix matrix;
  Vector rhs;
  Relation relation = Relation::Equality;
  std::optional<Vector> ground_truth;
  std::shared_ptr<const SvdFactors> svd;

  std::size_t rows() const noexcept { return matrix.rows(); }
  std::size_t cols() const noexcept { return matrix.cols(); }
};

/// Singular value profiles used by the generator.
class SpectrumSpec {
 public:
  enum class Kind { ExponentialDecay, ExplicitRatio, Explicit };

  /// sigma_j = e^{n - j + 1}, j = 1..n.
  static SpectrumSpec exponential_decay() { return SpectrumSpec(Kind::ExponentialDecay, 0.0, {}); }

  /// Log-uniform from 1 down to 1 / condition_number.
  static SpectrumSpec explicit_ratio(double condition_number) {
    return SpectrumSpec(Kind::ExplicitRatio, condition_number, {});
  }

  static SpectrumSpec explicit_values(Vector values) {
    return SpectrumSpec(Kind::Explicit, 0.0, std::move(values));
  }

  Kind kind() const noexcept { return kind_; }
  double condition_number() const noexcept { return condition_number_; }
  const Vector& values() const noexcept { return values_; }

  Vector singular_values(std::size_t n) const {
    Vector out(n);
    switch (kind_) {
      case Kind::ExponentialDecay:
        for (std::size_t j = 1; j <= n; ++j)
          out[j - 1] = std::exp(static_cast<double>(n) - static_cast<double>(j) + 1.0);
        break;
      case Kind::ExplicitRatio:
        if (!(condition_number_ >= 1.0) || !std::isfinite(condition_number_))
          throw Error(ErrorCode::InvalidSpectrum,
                      "condition number must be finite and >= 1, got " + format_double(condition_number_));
        for (std::size_t j = 0; j < n; ++j) {
          const double t = n == 1 ? 0.0 : static_cast<double>(j) / static_cast<double>(n - 1);
          out[j] = std::pow(condition_number_, -t);
        }
        out[n - 1] = 1.0 / condition_number_;
        break;
      case Kind::Explicit:
        if (values_.size() != n)
          throw Error(ErrorCode::InvalidSpectrum, "expected " + std::to_string(n) + " singular values, got " +
                                                      std::to_string(values_.size()));
        out = values_;
        break;
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (!(out[j] > 0.0) || !std::isfinite(out[j]))
        throw Error(ErrorCode::InvalidSpectrum, "singular value " + std::to_string(j) + " is not positive");
      if (j > 0 && out[j] > out[j - 1])
        throw Error(ErrorCode::InvalidSpectrum, "singular values increase at index " + std::to_string(j));
    }
    return out;
  }

 private:
  SpectrumSpec(Kind kind, double kappa, Vector values)
      : kind_(kind), condition_number_(kappa), values_(std::move(values)) {}

  Kind kind_;
  double condition_number_;
  Vector values_;
};

/// Standard-normal matrix filled column by column, so the leading columns of
/// a wide draw match a narrower draw from the same generator.
inline DenseMatrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  DenseMatrix g(rows, cols);
  for (std::size_t j = 0; j < cols; ++j)
    for (std::size_t i = 0; i < rows; ++i) g(i, j) = rng.normal();
  return g;
}

/// Q factor of the Householder QR of a dim x dim Gaussian matrix.
inline DenseMatrix generate_orthogonal(std::size_t dim, Rng& rng) {
  detail::require(dim >= 1, ErrorCode::InvalidArgument, "dimension must be >= 1");
  if (dim == 1) {
    // No reflector for a single row; Q carries the sign of the draw.
    return DenseMatrix(1, 1, {rng.normal() < 0.0 ? -1.0 : 1.0});
  }
  return HouseholderQr(gaussian_matrix(dim, dim, rng)).q();
}

/// Leading `count` columns of generate_orthogonal(dim) for the same generator
/// state, at O(dim * count^2) cost.
inline DenseMatrix generate_orthogonal_columns(std::size_t dim, std::size_t count, Rng& rng) {
  detail::require(dim >= 1 && count >= 1 && count <= dim, ErrorCode::InvalidArgument,
                  "need 1 <= count <= dim");
  if (dim == 1) return DenseMatrix(1, 1, {rng.normal() < 0.0 ? -1.0 : 1.0});
  return HouseholderQr(gaussian_matrix(dim, count, rng)).q(count);
}

enum class UFactor { Full, Thin };

class GeneratedSystem {
 public:
  GeneratedSystem(LinearSystem system, std::shared_ptr<const SvdFactors> factors)
      : system_(std::move(system)), factors_(std::move(factors)) {}

  const LinearSystem& system() const noexcept { return system_; }
  const DenseMatrix& matrix() const noexcept { return system_.matrix; }
  const DenseMatrix& u_factor() const noexcept { return factors_->u; }
  const DenseMatrix& v_factor() const noexcept { return factors_->v; }
  const Vector& singular_values() const noexcept { return factors_->singular_values; }
  const std::shared_ptr<const SvdFactors>& factors() const noexcept { return factors_; }

 private:
  LinearSystem system_;
  std::shared_ptr<const SvdFactors> factors_;
};

/// A = U[:, :n] diag(sigma) V^T with U, V from Gaussian QR.
///
/// Two seeds are drawn from `rng` (one for U, one for V), so the thin and full
/// variants produce the same A for the same generator state.
inline GeneratedSystem generate_ill_conditioned(std::size_t m, std::size_t n, const SpectrumSpec& spectrum,
                                                Rng& rng, UFactor u_kind = UFactor::Full) {
  detail::require(n >= 1 && m >= n, ErrorCode::InvalidArgument,
                  "need m >= n >= 1, got " + std::to_string(m) + "x" + std::to_string(n));
  Vector sigma = spectrum.singular_values(n);
  Rng u_rng(rng.next_u64());
  Rng v_rng(rng.next_u64());
  DenseMatrix u = u_kind == UFactor::Full ? generate_orthogonal(m, u_rng) : generate_orthogonal_columns(m, n, u_rng);
  DenseMatrix v = generate_orthogonal(n, v_rng);

  // A_ij = sum_k U_ik sigma_k V_jk
  DenseMatrix a(m, n);
  Vector scaled(n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < n; ++k) scaled[k] = u(i, k) * sigma[k];
    auto row = a.row(i);
    for (std::size_t j = 0; j < n; ++j) row[j] = dot(scaled, v.row(j));
  }

  LinearSystem system;
  system.matrix = std::move(a);
  system.rhs.assign(m, 0.0);
  system.relation = Relation::Equality;
  auto factors = std::make_shared<const SvdFactors>(SvdFactors{std::move(u), std::move(sigma), std::move(v)});
  system.svd = factors;
  return GeneratedSystem(std::move(system), std::move(factors));
}

/// rhs = A x_star, with ground truth and factors attached.
inline LinearSystem make_system(const GeneratedSystem& gen, std::span<const double> x_star,
                                Relation relation = Relation::Equality) {
  detail::require(x_star.size() == gen.matrix().cols(), ErrorCode::DimensionMismatch,
                  "x_star length " + std::to_string(x_star.size()) + " != " + std::to_string(gen.matrix().cols()));
  for (double v : x_star)
    detail::require(std::isfinite(v), ErrorCode::NonFinite, "x_star has a non-finite entry");
  LinearSystem out;
  out.matrix = gen.matrix();
  out.rhs = multiply(out.matrix, x_star);
  out.relation = relation;
  out.ground_truth = Vector(x_star.begin(), x_star.end());
  out.svd = gen.factors();
  return out;
}

/// e_n = [0, ..., 0, 1]
inline Vector last_basis_vector(std::size_t n) {
  Vector e(n, 0.0);
  e.back() = 1.0;
  return e;
}

}  // namespace kaczmarz
