#pragma once

#include <cmath>
#include <functional>
#include <optional>

#include "kaczmarz/dense.hpp"
#include "kaczmarz/simplex.hpp"
#include "kaczmarz/trace.hpp"

namespace kaczmarz {

/// ||x - x*||_2
inline double approximation_error(std::span<const double> x, std::span<const double> x_star) {
  detail::require(x.size() == x_star.size(), ErrorCode::DimensionMismatch, "iterate and solution lengths differ");
  return distance(x, x_star);
}

/// Fraction of rows with sign(<A_i, x>) == b_i, sign(0) = +1.
inline double classification_accuracy(const DenseMatrix& a, std::span<const double> labels,
                                      std::span<const double> x) {
  detail::require(labels.size() == a.rows(), ErrorCode::DimensionMismatch, "label count != rows");
  if (a.rows() == 0) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double s = dot(a.row(i), x) < 0.0 ? -1.0 : 1.0;
    if (s == labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(a.rows());
}

/// |<x - x*, v_j>| for every column v_j of V.
inline Vector singular_errors(std::span<const double> x, std::span<const double> x_star, const DenseMatrix& v) {
  detail::require(x.size() == v.rows() && x_star.size() == v.rows(), ErrorCode::DimensionMismatch,
                  "V rows != iterate length");
  const Vector e = subtract(x, x_star);
  Vector out = multiply_transpose(v, e);
  for (double& y : out) y = std::abs(y);
  return out;
}

struct ChebyshevResult {
  Vector center;
  double radius = 0.0;
  double box_bound = 0.0;
};

/// Largest ball inside {x : <a_i, x> <= b_i} intersected with the box
/// |x_j| <= R, as the LP
///   max r  s.t.  <a_i, x> + r ||a_i|| <= b_i,  |x_j| + r <= R,  r >= 0.
/// Rows are scaled to unit norm before the LP; the feasible set is the same.
inline ChebyshevResult chebyshev_center(const DenseMatrix& rows, std::span<const double> rhs, double box_bound) {
  const std::size_t m = rows.rows();
  const std::size_t n = rows.cols();
  detail::require(rhs.size() == m, ErrorCode::DimensionMismatch, "rhs length != rows");
  detail::require(box_bound > 0.0, ErrorCode::InvalidArgument, "box bound must be positive");

  // Shifted variables y = x + R; column n is r. The ball must fit the box:
  // y_j + r <= 2R and -y_j + r <= 0.
  DenseMatrix g(m + 2 * n, n + 1);
  Vector h(m + 2 * n);
  for (std::size_t i = 0; i < m; ++i) {
    const auto a = rows.row(i);
    const double len = norm2(a);
    if (!(len > 0.0)) throw Error(ErrorCode::ZeroRow, "Chebyshev constraint " + std::to_string(i) + " is zero");
    double shift = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      g(i, j) = a[j] / len;
      shift += a[j] / len;
    }
    g(i, n) = 1.0;
    h[i] = rhs[i] / len + box_bound * shift;
  }
  for (std::size_t j = 0; j < n; ++j) {
    g(m + j, j) = 1.0;
    g(m + j, n) = 1.0;
    h[m + j] = 2.0 * box_bound;
    g(m + n + j, j) = -1.0;
    g(m + n + j, n) = 1.0;
  }
  Vector c(n + 1, 0.0);
  c[n] = 1.0;
  const LpResult lp = solve_lp(g, h, c);
  if (lp.status == LpStatus::Infeasible) throw Error(ErrorCode::Infeasible, "Chebyshev LP is infeasible");
  if (lp.status == LpStatus::Unbounded) throw Error(ErrorCode::NotConverged, "Chebyshev LP reported unbounded");

  ChebyshevResult out;
  out.center.resize(n);
  for (std::size_t j = 0; j < n; ++j) out.center[j] = lp.solution[j] - box_bound;
  out.radius = lp.solution[n];
  out.box_bound = box_bound;
  return out;
}

/// Homogeneous form (b = 0), the case of A'x <= 0.
inline ChebyshevResult chebyshev_center(const DenseMatrix& rows, double box_bound) {
  const Vector zero(rows.rows(), 0.0);
  return chebyshev_center(rows, zero, box_bound);
}

inline double chebyshev_error(std::span<const double> x, const ChebyshevResult& result) {
  return distance(x, result.center);
}

/// Observer that fills an IterationTrace with whichever metrics it was given
/// inputs for.
class TraceRecorder {
 public:
  struct Inputs {
    std::optional<Vector> x_star;
    std::optional<ChebyshevResult> chebyshev;
    const DenseMatrix* classifier_rows = nullptr;  // original A for accuracy
    const Vector* labels = nullptr;
    const DenseMatrix* right_singular_vectors = nullptr;  // V, needs x_star
  };

  explicit TraceRecorder(Inputs inputs) : in_(std::move(inputs)) {}

  void operator()(std::size_t k, std::span<const double> x) {
    trace_.iterations.push_back(k);
    if (in_.x_star) trace_.approximation_error.push_back(approximation_error(x, *in_.x_star));
    if (in_.chebyshev) trace_.chebyshev_error.push_back(chebyshev_error(x, *in_.chebyshev));
    if (in_.classifier_rows && in_.labels)
      trace_.accuracy.push_back(classification_accuracy(*in_.classifier_rows, *in_.labels, x));
    if (in_.right_singular_vectors && in_.x_star)
      trace_.singular_errors.push_back(singular_errors(x, *in_.x_star, *in_.right_singular_vectors));
  }

  const IterationTrace& trace() const noexcept { return trace_; }
  IterationTrace take() { return std::move(trace_); }

 private:
  Inputs in_;
  IterationTrace trace_;
};

/// Solver observer that forwards to `recorder` by reference.
inline std::function<void(std::size_t, std::span<const double>)> as_observer(TraceRecorder& recorder) {
  return [&recorder](std::size_t k, std::span<const double> x) { recorder(k, x); };
}

}  // namespace kaczmarz
