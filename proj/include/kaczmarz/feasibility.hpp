#pragma once

#include <cmath>
#include <optional>
#include <utility>

#include "kaczmarz/dense.hpp"
#include "kaczmarz/matgen.hpp"

namespace kaczmarz {

/// b_i = -1 if (A x*)_i < 0, else +1. Zero lands on +1.
inline Vector binarize_rhs(const DenseMatrix& a, std::span<const double> x_star) {
  Vector labels = multiply(a, x_star);
  for (double& v : labels) v = v < 0.0 ? -1.0 : 1.0;
  return labels;
}

/// Zero-based lexicographic enumeration of pairs (i, j), i < j < m:
/// h = 0 -> (0,1), 1 -> (0,2), ..., m-2 -> (0,m-1), m-1 -> (1,2), ...
class PairIndexMap {
 public:
  PairIndexMap() = default;
  explicit PairIndexMap(std::size_t m) : m_(m) {}

  std::size_t m() const noexcept { return m_; }
  std::size_t size() const noexcept { return m_ < 2 ? 0 : m_ * (m_ - 1) / 2; }

  /// Number of pairs whose first index is below i.
  std::size_t offset(std::size_t i) const noexcept { return i * (2 * m_ - i - 1) / 2; }

  std::size_t rank(std::size_t i, std::size_t j) const {
    if (!(i < j && j < m_))
      throw Error(ErrorCode::IndexOutOfRange, "pair (" + std::to_string(i) + ", " + std::to_string(j) +
                                                  ") invalid for m = " + std::to_string(m_));
    return offset(i) + (j - i - 1);
  }

  std::pair<std::size_t, std::size_t> pair(std::size_t h) const {
    if (h >= size())
      throw Error(ErrorCode::IndexOutOfRange,
                  "pair index " + std::to_string(h) + " >= " + std::to_string(size()));
    // Closed-form guess for i, then nudge to absorb rounding.
    const double mm = static_cast<double>(m_);
    const double disc = (2.0 * mm - 1.0) * (2.0 * mm - 1.0) - 8.0 * static_cast<double>(h);
    auto i = static_cast<std::size_t>(std::max(0.0, std::floor(((2.0 * mm - 1.0) - std::sqrt(disc)) / 2.0)));
    while (i > 0 && offset(i) > h) --i;
    while (i + 1 < m_ && offset(i + 1) <= h) ++i;
    return {i, i + 1 + (h - offset(i))};
  }

 private:
  std::size_t m_ = 0;
};

/// Free-function spellings of the map.
inline std::pair<std::size_t, std::size_t> pair_index(const PairIndexMap& map, std::size_t h) {
  return map.pair(h);
}
inline std::size_t pair_rank(const PairIndexMap& map, std::size_t i, std::size_t j) { return map.rank(i, j); }

/// Linear feasibility form of a labelled system: base rows A' = -B (.) A with
/// b' = 0, and optionally the pairwise differences P stacked below.
///
/// Row r of the combined view is base row r for r < m and pair row r - m
/// otherwise.
struct FeasibilitySystem {
  LinearSystem base;
  std::optional<DenseMatrix> pair_rows;
  PairIndexMap pairs;
  Vector labels;

  std::size_t base_rows() const noexcept { return base.rows(); }
  std::size_t pair_count() const noexcept { return pair_rows ? pair_rows->rows() : 0; }
  std::size_t combined_rows() const noexcept { return base_rows() + pair_count(); }
  std::size_t cols() const noexcept { return base.cols(); }

  std::span<const double> row(std::size_t r) const {
    if (r < base_rows()) return base.matrix.row(r);
    detail::require(r < combined_rows(), ErrorCode::IndexOutOfRange,
                    "combined row " + std::to_string(r) + " out of range");
    return pair_rows->row(r - base_rows());
  }
};

/// A'_i = -b_i A_i, rhs zero, relation <=.
inline FeasibilitySystem hadamard_transform(const DenseMatrix& a, std::span<const double> labels) {
  detail::require(labels.size() == a.rows(), ErrorCode::DimensionMismatch,
                  "label count " + std::to_string(labels.size()) + " != rows " + std::to_string(a.rows()));
  FeasibilitySystem out;
  out.base.matrix = DenseMatrix(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double b = labels[i];
    if (b != 1.0 && b != -1.0)
      throw Error(ErrorCode::InvalidLabel, "label " + std::to_string(i) + " is " + format_double(b));
    auto dst = out.base.matrix.row(i);
    const auto src = a.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) dst[j] = -b * src[j];
  }
  out.base.rhs.assign(a.rows(), 0.0);
  out.base.relation = Relation::LessEqual;
  out.labels.assign(labels.begin(), labels.end());
  out.pairs = PairIndexMap(a.rows());
  return out;
}

/// P_h = A'_i - A'_j for (i, j) = pair(h).
inline std::pair<DenseMatrix, PairIndexMap> pairwise_differences(const DenseMatrix& base) {
  const std::size_t m = base.rows();
  if (m < 2) throw Error(ErrorCode::TooFewRows, "pairwise differences need at least 2 rows");
  PairIndexMap map(m);
  DenseMatrix p(map.size(), base.cols());
  std::size_t h = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const auto ai = base.row(i);
    for (std::size_t j = i + 1; j < m; ++j, ++h) {
      const auto aj = base.row(j);
      auto dst = p.row(h);
      for (std::size_t c = 0; c < base.cols(); ++c) dst[c] = ai[c] - aj[c];
    }
  }
  return {std::move(p), map};
}

inline void attach_pairwise_differences(FeasibilitySystem& fs) {
  auto [p, map] = pairwise_differences(fs.base.matrix);
  fs.pair_rows = std::move(p);
  fs.pairs = map;
}

/// Materialized [A'; P] with zero rhs. Without P this is just the base.
inline LinearSystem combined_system(const LinearSystem& base, const std::optional<DenseMatrix>& pairs) {
  LinearSystem out;
  out.matrix = pairs ? stack_rows(base.matrix, *pairs) : base.matrix;
  out.rhs.assign(out.matrix.rows(), 0.0);
  out.relation = Relation::LessEqual;
  out.ground_truth = base.ground_truth;
  out.svd = base.svd;
  return out;
}

inline LinearSystem combined_system(const FeasibilitySystem& fs) { return combined_system(fs.base, fs.pair_rows); }

/// Pair rows with (P x)_h > 0. The pair rows need not hold at x*.
inline std::size_t count_violated_pair_rows(const FeasibilitySystem& fs, std::span<const double> x) {
  if (!fs.pair_rows) return 0;
  std::size_t count = 0;
  for (std::size_t h = 0; h < fs.pair_rows->rows(); ++h)
    if (dot(fs.pair_rows->row(h), x) > 0.0) ++count;
  return count;
}

}  // namespace kaczmarz
