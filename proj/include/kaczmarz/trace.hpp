#pragma once

#include <cmath>
#include <ostream>
#include <vector>

#include "kaczmarz/dense.hpp"

namespace kaczmarz {

/// Per-record metric series. A series is either empty (metric absent) or has
/// one value per recorded iteration.
struct IterationTrace {
  std::vector<std::size_t> iterations;
  Vector approximation_error;
  Vector chebyshev_error;
  Vector accuracy;
  std::vector<Vector> singular_errors;

  std::size_t size() const noexcept { return iterations.size(); }
  bool has_approximation_error() const noexcept { return !approximation_error.empty(); }
  bool has_chebyshev_error() const noexcept { return !chebyshev_error.empty(); }
  bool has_accuracy() const noexcept { return !accuracy.empty(); }
  bool has_singular_errors() const noexcept { return !singular_errors.empty(); }
  std::size_t singular_error_count() const noexcept {
    return singular_errors.empty() ? 0 : singular_errors.front().size();
  }

  /// Present series all match the iteration count and hold finite values.
  bool consistent() const {
    const std::size_t n = size();
    auto finite = [](const Vector& s) {
      for (double v : s)
        if (!std::isfinite(v)) return false;
      return true;
    };
    auto ok = [&](const Vector& s) { return s.empty() || (s.size() == n && finite(s)); };
    if (!ok(approximation_error) || !ok(chebyshev_error) || !ok(accuracy)) return false;
    if (!singular_errors.empty()) {
      if (singular_errors.size() != n) return false;
      for (const auto& s : singular_errors)
        if (s.size() != singular_error_count() || !finite(s)) return false;
    }
    return true;
  }
};

/// Header: iteration,approx_error,cheb_error,accuracy,sing_err_1..sing_err_n
/// with absent metrics left out.
inline void write_trace_csv(std::ostream& out, const IterationTrace& trace) {
  out << "iteration";
  if (trace.has_approximation_error()) out << ",approx_error";
  if (trace.has_chebyshev_error()) out << ",cheb_error";
  if (trace.has_accuracy()) out << ",accuracy";
  for (std::size_t j = 1; j <= trace.singular_error_count(); ++j) out << ",sing_err_" << j;
  out << '\n';
  for (std::size_t r = 0; r < trace.size(); ++r) {
    out << trace.iterations[r];
    if (trace.has_approximation_error()) out << ',' << format_double(trace.approximation_error[r]);
    if (trace.has_chebyshev_error()) out << ',' << format_double(trace.chebyshev_error[r]);
    if (trace.has_accuracy()) out << ',' << format_double(trace.accuracy[r]);
    if (trace.has_singular_errors())
      for (double v : trace.singular_errors[r]) out << ',' << format_double(v);
    out << '\n';
  }
}

}  // namespace kaczmarz
