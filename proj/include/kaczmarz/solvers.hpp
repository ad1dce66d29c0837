#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "kaczmarz/dense.hpp"
#include "kaczmarz/matgen.hpp"
#include "kaczmarz/random.hpp"
#include "kaczmarz/sampling.hpp"
#include "kaczmarz/trace.hpp"

namespace kaczmarz {

struct SolverConfig {
  std::size_t beta = 1;
  double lambda = 1.0;
  std::size_t max_iterations = 1000;
  std::uint64_t seed = 0;
  std::optional<double> stop_tolerance;  // on ||x - x*||
  std::size_t trace_stride = 1;
  std::optional<Vector> initial;  // x_0; zero when absent
  bool stop_when_feasible = false;  // LessEqual only, checked at trace points

  void validate() const {
    detail::require(beta >= 1, ErrorCode::InvalidArgument, "beta must be >= 1");
    detail::require(lambda > 0.0 && lambda <= 2.0, ErrorCode::InvalidArgument,
                    "lambda must lie in (0, 2], got " + format_double(lambda));
    detail::require(max_iterations >= 1, ErrorCode::InvalidArgument, "iteration budget must be >= 1");
    detail::require(trace_stride >= 1, ErrorCode::InvalidArgument, "trace stride must be >= 1");
    if (stop_tolerance)
      detail::require(*stop_tolerance >= 0.0, ErrorCode::InvalidArgument, "stop tolerance must be >= 0");
  }
};

enum class Termination { Budget, Tolerance, Degenerate };

inline std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::Budget: return "budget";
    case Termination::Tolerance: return "tolerance";
    case Termination::Degenerate: return "degenerate";
  }
  return "unknown";
}

struct SolveResult {
  Vector x;
  std::size_t iterations = 0;
  IterationTrace trace;
  Termination reason = Termination::Budget;
};

/// Called at trace points with (k, x_k). Must not touch solver state.
using Observer = std::function<void(std::size_t, std::span<const double>)>;

/// Signed violation for <= rows, plain residual for equality rows.
inline double row_residual(std::span<const double> row, double rhs, std::span<const double> x) {
  return dot(row, x) - rhs;
}

/// Projection of x onto row i's hyperplane (equality) or half-space (<=),
/// relaxed by lambda, in place. Returns false when x is left untouched.
inline bool project_in_place(std::span<const double> row, double rhs, double row_norm_sq, Relation relation,
                             double lambda, std::span<double> x) {
  if (!(row_norm_sq > 0.0)) throw Error(ErrorCode::ZeroRow, "projection onto a zero row");
  double r = row_residual(row, rhs, x);
  if (relation == Relation::LessEqual && r <= 0.0) return false;
  if (r == 0.0) return false;
  axpy(-lambda * r / row_norm_sq, row, x);
  return true;
}

/// x' = x - lambda * (<a_i, x> - b_i) / ||a_i||^2 * a_i (positive part for <=).
inline Vector rk_step(const LinearSystem& system, std::span<const double> x, std::size_t row, double lambda) {
  detail::require(row < system.rows(), ErrorCode::IndexOutOfRange, "row " + std::to_string(row) + " out of range");
  detail::require(x.size() == system.cols(), ErrorCode::DimensionMismatch, "iterate length != cols");
  Vector out(x.begin(), x.end());
  const auto a = system.matrix.row(row);
  project_in_place(a, system.rhs[row], squared_norm(a), system.relation, lambda, out);
  return out;
}

/// Row of tau with the largest violation. For equality rows the violation is
/// |residual| (an equation is the pair of inequalities a x <= b, -a x <= -b).
/// Ties go to the lowest row index.
inline std::size_t select_max_residual(const LinearSystem& system, std::span<const double> x,
                                       std::span<const std::size_t> tau) {
  if (tau.empty()) throw Error(ErrorCode::EmptySample, "SKM sample is empty");
  std::size_t best = tau[0];
  double best_value = -INFINITY;
  for (std::size_t i : tau) {
    detail::require(i < system.rows(), ErrorCode::IndexOutOfRange, "sampled row out of range");
    double r = row_residual(system.matrix.row(i), system.rhs[i], x);
    if (system.relation == Relation::Equality) r = std::abs(r);
    if (r > best_value || (r == best_value && i < best)) {
      best = i;
      best_value = r;
    }
  }
  return best;
}

struct SkmStep {
  Vector x;
  std::size_t row = 0;
};

inline SkmStep skm_step(const LinearSystem& system, std::span<const double> x, std::span<const std::size_t> tau,
                        double lambda) {
  const std::size_t t = select_max_residual(system, x, tau);
  return {rk_step(system, x, t, lambda), t};
}

/// Anything that fills `tau` with the rows to consider at step k, given x_{k-1}.
template <class S>
concept RowSampler = requires(S s, std::size_t k, std::span<const double> x, Rng& rng, std::vector<std::size_t>& tau) {
  s(k, x, rng, tau);
};

/// beta rows per step from a fixed distribution.
class DistributionSampler {
 public:
  DistributionSampler(RowDistribution dist, std::size_t beta) : dist_(std::move(dist)), beta_(beta) {
    if (beta_ > dist_.size())
      throw Error(ErrorCode::SampleSize, "beta " + std::to_string(beta_) + " exceeds support of " +
                                             std::to_string(dist_.size()));
  }

  void operator()(std::size_t, std::span<const double>, Rng& rng, std::vector<std::size_t>& tau) const {
    sample_rows_into(dist_, beta_, rng, tau);
  }

  const RowDistribution& distribution() const noexcept { return dist_; }

 private:
  RowDistribution dist_;
  std::size_t beta_;
};

inline bool system_satisfied(const LinearSystem& system, std::span<const double> x) {
  for (std::size_t i = 0; i < system.rows(); ++i) {
    const double r = row_residual(system.matrix.row(i), system.rhs[i], x);
    if (system.relation == Relation::LessEqual ? r > 0.0 : r != 0.0) return false;
  }
  return true;
}

/// The SKM loop. Starting from x_0 (zero unless configured) it applies K
/// sample-select-project steps, stopping early on the tolerance rule.
///
/// Trace points are k = 0, stride, 2 stride, ... plus the final iteration,
/// so a full run records ceil(K / stride) + 1 entries. The built-in trace
/// holds ||x_k - x*|| whenever the system carries a ground truth.
template <RowSampler Sampler>
SolveResult run_solver(const LinearSystem& system, const SolverConfig& config, Sampler&& sampler,
                       std::span<const Observer> observers = {}) {
  config.validate();
  const std::size_t n = system.cols();
  detail::require(system.rhs.size() == system.rows(), ErrorCode::DimensionMismatch, "rhs length != rows");
  if (config.stop_tolerance)
    detail::require(system.ground_truth.has_value(), ErrorCode::InvalidArgument,
                    "stop tolerance needs a ground-truth solution");

  SolveResult result;
  result.x = config.initial ? *config.initial : Vector(n, 0.0);
  detail::require(result.x.size() == n, ErrorCode::DimensionMismatch, "initial iterate length != cols");

  const Vector norms_sq = row_squared_norms(system.matrix);
  const Vector* truth = system.ground_truth ? &*system.ground_truth : nullptr;
  Rng rng(config.seed);
  std::vector<std::size_t> tau;
  tau.reserve(config.beta);

  auto record = [&](std::size_t k) {
    result.trace.iterations.push_back(k);
    if (truth) result.trace.approximation_error.push_back(distance(result.x, *truth));
    for (const auto& obs : observers) obs(k, result.x);
  };
  auto within_tolerance = [&]() { return config.stop_tolerance && distance(result.x, *truth) <= *config.stop_tolerance; };

  record(0);
  if (within_tolerance()) {
    result.reason = Termination::Tolerance;
    return result;
  }
  if (config.stop_when_feasible && system.relation == Relation::LessEqual && system_satisfied(system, result.x)) {
    result.reason = Termination::Degenerate;
    return result;
  }

  for (std::size_t k = 1; k <= config.max_iterations; ++k) {
    sampler(k, std::span<const double>(result.x), rng, tau);
    const std::size_t t = select_max_residual(system, result.x, tau);
    if (project_in_place(system.matrix.row(t), system.rhs[t], norms_sq[t], system.relation, config.lambda, result.x)) {
      for (double v : result.x)
        if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "iterate became non-finite at step " + std::to_string(k));
    }
    result.iterations = k;
    const bool at_stride = k % config.trace_stride == 0;
    if (within_tolerance()) {
      record(k);
      result.reason = Termination::Tolerance;
      return result;
    }
    if (at_stride || k == config.max_iterations) {
      record(k);
      if (config.stop_when_feasible && system.relation == Relation::LessEqual &&
          system_satisfied(system, result.x)) {
        result.reason = Termination::Degenerate;
        return result;
      }
    }
  }
  result.reason = Termination::Budget;
  return result;
}

/// Convenience overload for distribution-based strategies on a plain system.
inline SolveResult run_solver(const LinearSystem& system, const SolverConfig& config,
                              const SamplingStrategy& strategy, std::span<const Observer> observers = {}) {
  return run_solver(system, config, DistributionSampler(build_distribution(strategy, system), config.beta), observers);
}

/// (1 - sigma_min^2 / ||A||_F^2)^k * ||e_0||^2
inline double rk_bound(double sigma_min, double frobenius_sq, std::size_t k, double initial_error_sq) {
  detail::require(frobenius_sq > 0.0, ErrorCode::InvalidArgument, "Frobenius norm must be positive");
  const double rate = 1.0 - (sigma_min * sigma_min) / frobenius_sq;
  return std::pow(rate, static_cast<double>(k)) * initial_error_sq;
}

inline double rk_bound(const LinearSystem& system, std::size_t k, double initial_error_sq) {
  if (!system.svd) throw Error(ErrorCode::MissingSvd, "rk_bound needs the singular values of A");
  const double f = system.matrix.frobenius_norm();
  return rk_bound(system.svd->singular_values.back(), f * f, k, initial_error_sq);
}

}  // namespace kaczmarz
