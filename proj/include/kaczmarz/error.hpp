#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace kaczmarz {

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  InvalidSpectrum,
  RankDeficient,
  NotConverged,
  InvalidLabel,
  TooFewRows,
  IndexOutOfRange,
  DegenerateSpectrum,
  EmptySupport,
  SampleSize,
  ZeroRow,
  EmptySample,
  MissingSvd,
  Infeasible,
  NonFinite,
  Config,
  Io,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::DimensionMismatch: return "dimension-mismatch";
    case ErrorCode::InvalidSpectrum: return "invalid-spectrum";
    case ErrorCode::RankDeficient: return "rank-deficient";
    case ErrorCode::NotConverged: return "not-converged";
    case ErrorCode::InvalidLabel: return "invalid-label";
    case ErrorCode::TooFewRows: return "too-few-rows";
    case ErrorCode::IndexOutOfRange: return "index-out-of-range";
    case ErrorCode::DegenerateSpectrum: return "degenerate-spectrum";
    case ErrorCode::EmptySupport: return "empty-support";
    case ErrorCode::SampleSize: return "sample-size";
    case ErrorCode::ZeroRow: return "zero-row";
    case ErrorCode::EmptySample: return "empty-sample";
    case ErrorCode::MissingSvd: return "missing-svd";
    case ErrorCode::Infeasible: return "infeasible";
    case ErrorCode::NonFinite: return "non-finite";
    case ErrorCode::Config: return "config";
    case ErrorCode::Io: return "io";
  }
  return "unknown";
}

/// Numerical failures map to CLI exit code 3; everything else is a usage or
/// configuration problem.
inline bool is_numerical(ErrorCode code) {
  switch (code) {
    case ErrorCode::RankDeficient:
    case ErrorCode::NotConverged:
    case ErrorCode::DegenerateSpectrum:
    case ErrorCode::ZeroRow:
    case ErrorCode::Infeasible:
    case ErrorCode::NonFinite:
      return true;
    default:
      return false;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Rank-deficiency carries the offending pivot of the triangular factor.
class RankDeficientError : public Error {
 public:
  RankDeficientError(std::size_t pivot, double value)
      : Error(ErrorCode::RankDeficient, "pivot " + std::to_string(pivot) + " of R is " + sci(value)),
        pivot_(pivot) {}

  std::size_t pivot() const noexcept { return pivot_; }

 private:
  static std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
  }

  std::size_t pivot_;
};

/// Inverse iteration that ran out of budget keeps its last residual.
class ConvergenceError : public Error {
 public:
  ConvergenceError(std::size_t iterations, double residual)
      : Error(ErrorCode::NotConverged, "no convergence after " + std::to_string(iterations) +
                                           " iterations, residual " + std::to_string(residual)),
        residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

namespace detail {

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) throw Error(code, message);
}

}  // namespace detail
}  // namespace kaczmarz
