#pragma once

#include <cmath>
#include <vector>

#include "kaczmarz/dense.hpp"
#include "kaczmarz/error.hpp"

namespace kaczmarz {

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  Vector solution;
  double objective = 0.0;
  std::size_t pivots = 0;
};

/// maximize c^T z  subject to  G z <= h,  z >= 0.
///
/// Dense two-phase tableau simplex with Bland's rule on both the entering
/// and leaving choice, which rules out cycling on the degenerate vertices a
/// cone of constraints through the origin produces.
class DenseSimplex {
 public:
  DenseSimplex(const DenseMatrix& g, std::span<const double> h, std::span<const double> c, double tol = 1e-10)
      : rows_(g.rows()), vars_(g.cols()), tol_(tol) {
    detail::require(h.size() == rows_ && c.size() == vars_, ErrorCode::DimensionMismatch, "LP dimensions differ");
    std::size_t artificial = 0;
    for (double v : h)
      if (v < 0.0) ++artificial;
    slack_begin_ = vars_;
    artificial_begin_ = vars_ + rows_;
    width_ = vars_ + rows_ + artificial + 1;  // + rhs
    tableau_.assign(rows_ * width_, 0.0);
    basis_.assign(rows_, 0);
    std::size_t next_artificial = artificial_begin_;
    for (std::size_t i = 0; i < rows_; ++i) {
      const double sign = h[i] < 0.0 ? -1.0 : 1.0;
      for (std::size_t j = 0; j < vars_; ++j) at(i, j) = sign * g(i, j);
      at(i, slack_begin_ + i) = sign;
      at(i, rhs()) = sign * h[i];
      if (h[i] < 0.0) {
        at(i, next_artificial) = 1.0;
        basis_[i] = next_artificial++;
      } else {
        basis_[i] = slack_begin_ + i;
      }
    }
    cost_.assign(c.begin(), c.end());
  }

  LpResult solve(std::size_t max_pivots = 1000000) {
    LpResult result;
    const std::size_t total = width_ - 1;
    if (total > artificial_begin_) {
      // Phase 1: maximize -sum(artificials).
      Vector phase1(total, 0.0);
      for (std::size_t j = artificial_begin_; j < total; ++j) phase1[j] = -1.0;
      if (!optimize(phase1, total, max_pivots, result.pivots))
        throw Error(ErrorCode::NotConverged, "phase 1 did not terminate");
      double infeasibility = 0.0;
      for (std::size_t i = 0; i < rows_; ++i)
        if (basis_[i] >= artificial_begin_) infeasibility += at(i, rhs());
      if (infeasibility > 1e-8 * (1.0 + rhs_scale())) {
        result.status = LpStatus::Infeasible;
        return result;
      }
      drive_out_artificials();
    }
    Vector phase2(total, 0.0);
    std::copy(cost_.begin(), cost_.end(), phase2.begin());
    if (!optimize(phase2, artificial_begin_, max_pivots, result.pivots)) {
      result.status = LpStatus::Unbounded;
      return result;
    }
    result.status = LpStatus::Optimal;
    result.solution.assign(vars_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i)
      if (basis_[i] < vars_) result.solution[basis_[i]] = at(i, rhs());
    result.objective = dot(cost_, result.solution);
    return result;
  }

 private:
  double& at(std::size_t i, std::size_t j) { return tableau_[i * width_ + j]; }
  double at(std::size_t i, std::size_t j) const { return tableau_[i * width_ + j]; }
  std::size_t rhs() const { return width_ - 1; }

  double rhs_scale() const {
    double s = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) s = std::max(s, std::abs(at(i, rhs())));
    return s;
  }

  void pivot(std::size_t r, std::size_t col) {
    const double p = at(r, col);
    for (std::size_t j = 0; j < width_; ++j) at(r, j) /= p;
    at(r, col) = 1.0;
    for (std::size_t i = 0; i < rows_; ++i) {
      if (i == r) continue;
      const double f = at(i, col);
      if (f == 0.0) continue;
      double* dst = &tableau_[i * width_];
      const double* src = &tableau_[r * width_];
      for (std::size_t j = 0; j < width_; ++j) dst[j] -= f * src[j];
      dst[col] = 0.0;
    }
    basis_[r] = col;
  }

  /// Maximizes `objective` over columns [0, limit). Returns false when the
  /// objective is unbounded.
  bool optimize(const Vector& objective, std::size_t limit, std::size_t max_pivots, std::size_t& pivots) {
    Vector reduced(limit);
    for (;;) {
      // reduced_j = c_B^T column_j - c_j; a negative value can enter.
      std::size_t entering = limit;
      for (std::size_t j = 0; j < limit; ++j) {
        double z = -objective[j];
        for (std::size_t i = 0; i < rows_; ++i) z += objective[basis_[i]] * at(i, j);
        if (z < -tol_) {
          entering = j;
          break;
        }
      }
      if (entering == limit) return true;
      std::size_t leaving = rows_;
      double best_ratio = INFINITY;
      for (std::size_t i = 0; i < rows_; ++i) {
        const double a = at(i, entering);
        if (a <= tol_) continue;
        const double ratio = at(i, rhs()) / a;
        if (ratio < best_ratio - tol_ || (std::abs(ratio - best_ratio) <= tol_ && basis_[i] < basis_[leaving])) {
          best_ratio = ratio;
          leaving = i;
        }
      }
      if (leaving == rows_) return false;
      pivot(leaving, entering);
      if (++pivots > max_pivots) throw Error(ErrorCode::NotConverged, "simplex pivot budget exhausted");
    }
  }

  void drive_out_artificials() {
    for (std::size_t i = 0; i < rows_; ++i) {
      if (basis_[i] < artificial_begin_) continue;
      for (std::size_t j = 0; j < artificial_begin_; ++j) {
        if (std::abs(at(i, j)) > tol_) {
          pivot(i, j);
          break;
        }
      }
      // A row with no usable column is redundant; its artificial stays basic at zero.
    }
  }

  std::size_t rows_;
  std::size_t vars_;
  double tol_;
  std::size_t slack_begin_ = 0;
  std::size_t artificial_begin_ = 0;
  std::size_t width_ = 0;
  Vector tableau_;
  std::vector<std::size_t> basis_;
  Vector cost_;
};

inline LpResult solve_lp(const DenseMatrix& g, std::span<const double> h, std::span<const double> c) {
  return DenseSimplex(g, h, c).solve();
}

}  // namespace kaczmarz
