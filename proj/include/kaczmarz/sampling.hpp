#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "kaczmarz/dense.hpp"
#include "kaczmarz/feasibility.hpp"
#include "kaczmarz/matgen.hpp"
#include "kaczmarz/random.hpp"

namespace kaczmarz {

enum class StrategyKind {
  Uniform,
  SquaredNorm,
  Spectral,
  SchemeBaseOnly,
  SchemeCombinedUniform,
  SchemePairsOnly,
  ClusterGuided,
};

inline std::string_view to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::Uniform: return "uniform";
    case StrategyKind::SquaredNorm: return "sq-norm";
    case StrategyKind::Spectral: return "spectral";
    case StrategyKind::SchemeBaseOnly: return "scheme-base";
    case StrategyKind::SchemeCombinedUniform: return "scheme-combined";
    case StrategyKind::SchemePairsOnly: return "scheme-pairs";
    case StrategyKind::ClusterGuided: return "cluster";
  }
  return "unknown";
}

inline StrategyKind parse_strategy_kind(std::string_view name) {
  for (auto kind : {StrategyKind::Uniform, StrategyKind::SquaredNorm, StrategyKind::Spectral,
                    StrategyKind::SchemeBaseOnly, StrategyKind::SchemeCombinedUniform,
                    StrategyKind::SchemePairsOnly, StrategyKind::ClusterGuided})
    if (to_string(kind) == name) return kind;
  throw Error(ErrorCode::Config, "unknown sampling strategy '" + std::string(name) + "'");
}

struct SamplingStrategy {
  StrategyKind kind = StrategyKind::Uniform;
  Vector spectral_vector;  // only for Spectral

  static SamplingStrategy of(StrategyKind kind) {
    detail::require(kind != StrategyKind::Spectral, ErrorCode::InvalidArgument,
                    "spectral strategy needs a weighting vector");
    return {kind, {}};
  }

  static SamplingStrategy spectral(Vector v) {
    const double len = norm2(v);
    if (std::abs(len - 1.0) > 1e-12)
      throw Error(ErrorCode::InvalidArgument, "spectral vector norm is " + format_double(len) + ", expected 1");
    return {StrategyKind::Spectral, std::move(v)};
  }
};

/// Discrete distribution over row indices. Zero-weight entries are dropped
/// from the support at construction.
class RowDistribution {
 public:
  RowDistribution(std::vector<std::size_t> rows, const Vector& raw_weights, bool uniform = false)
      : uniform_(uniform) {
    detail::require(rows.size() == raw_weights.size(), ErrorCode::DimensionMismatch,
                    "support and weight lengths differ");
    double total = 0.0;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const double w = raw_weights[k];
      detail::require(std::isfinite(w) && w >= 0.0, ErrorCode::InvalidArgument, "weights must be finite and >= 0");
      if (w > 0.0) {
        support_.push_back(rows[k]);
        weights_.push_back(w);
        total += w;
      }
    }
    if (support_.empty()) throw Error(ErrorCode::EmptySupport, "distribution has no sampleable rows");
    cumulative_.resize(weights_.size());
    double running = 0.0;
    for (std::size_t k = 0; k < weights_.size(); ++k) {
      weights_[k] /= total;
      running += weights_[k];
      cumulative_[k] = running;
    }
  }

  static RowDistribution uniform_over(std::vector<std::size_t> rows) {
    Vector w(rows.size(), 1.0);
    return RowDistribution(std::move(rows), w, true);
  }

  const std::vector<std::size_t>& support() const noexcept { return support_; }
  const Vector& weights() const noexcept { return weights_; }
  std::size_t size() const noexcept { return support_.size(); }
  bool is_uniform() const noexcept { return uniform_; }

  /// Probability of row index `row` (0 when outside the support).
  double probability(std::size_t row) const {
    const auto it = std::find(support_.begin(), support_.end(), row);
    return it == support_.end() ? 0.0 : weights_[static_cast<std::size_t>(it - support_.begin())];
  }

  /// One draw, returned as a position in the support.
  std::size_t draw_position(Rng& rng) const {
    if (uniform_) return rng.uniform_index(support_.size());
    const double u = rng.uniform() * cumulative_.back();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    const auto pos = static_cast<std::size_t>(it - cumulative_.begin());
    return std::min(pos, support_.size() - 1);
  }

 private:
  std::vector<std::size_t> support_;
  Vector weights_;
  Vector cumulative_;
  bool uniform_ = false;
};

/// omega_i = |<a_i, v>| / sum_l |<a_l, v>|
inline Vector spectral_weights(const DenseMatrix& a, std::span<const double> v) {
  detail::require(v.size() == a.cols(), ErrorCode::DimensionMismatch, "weighting vector length != cols");
  Vector w = multiply(a, v);
  double total = 0.0;
  for (double& x : w) {
    x = std::abs(x);
    total += x;
  }
  if (!(total > 0.0)) throw Error(ErrorCode::DegenerateSpectrum, "every spectral coefficient is zero");
  for (double& x : w) x /= total;
  return w;
}

namespace detail {

inline RowDistribution uniform_nonzero(const Vector& norms_sq, std::size_t first, std::size_t last) {
  std::vector<std::size_t> rows;
  for (std::size_t r = first; r < last; ++r)
    if (norms_sq[r] > 0.0) rows.push_back(r);
  if (rows.empty()) throw Error(ErrorCode::EmptySupport, "no nonzero rows in the requested range");
  return RowDistribution::uniform_over(std::move(rows));
}

template <class RowAt>
RowDistribution build_distribution_impl(const SamplingStrategy& strategy, std::size_t total_rows,
                                        std::size_t base_rows, RowAt&& row_at) {
  Vector norms_sq(total_rows);
  for (std::size_t r = 0; r < total_rows; ++r) norms_sq[r] = squared_norm(row_at(r));

  std::vector<std::size_t> all(total_rows);
  for (std::size_t r = 0; r < total_rows; ++r) all[r] = r;

  switch (strategy.kind) {
    case StrategyKind::Uniform:
    case StrategyKind::SchemeCombinedUniform:
      return uniform_nonzero(norms_sq, 0, total_rows);
    case StrategyKind::SchemeBaseOnly:
      return uniform_nonzero(norms_sq, 0, base_rows);
    case StrategyKind::SchemePairsOnly:
      return uniform_nonzero(norms_sq, base_rows, total_rows);
    case StrategyKind::SquaredNorm:
      return RowDistribution(std::move(all), norms_sq);
    case StrategyKind::Spectral: {
      const auto& v = strategy.spectral_vector;
      require(v.size() == row_at(0).size(), ErrorCode::DimensionMismatch, "spectral vector length != cols");
      Vector w(total_rows);
      double total = 0.0;
      for (std::size_t r = 0; r < total_rows; ++r) {
        w[r] = norms_sq[r] > 0.0 ? std::abs(dot(row_at(r), v)) : 0.0;
        total += w[r];
      }
      if (!(total > 0.0)) throw Error(ErrorCode::DegenerateSpectrum, "every spectral coefficient is zero");
      return RowDistribution(std::move(all), w);
    }
    case StrategyKind::ClusterGuided:
      throw Error(ErrorCode::InvalidArgument,
                  "cluster-guided sampling depends on the iterate; use ClusterGuidedSampler");
  }
  throw Error(ErrorCode::InvalidArgument, "unhandled strategy");
}

}  // namespace detail

/// Distribution over the rows of a plain system; the scheme kinds treat every
/// row as a base row.
inline RowDistribution build_distribution(const SamplingStrategy& strategy, const LinearSystem& system) {
  detail::require(system.rows() > 0, ErrorCode::EmptySupport, "system has no rows");
  return detail::build_distribution_impl(strategy, system.rows(), system.rows(),
                                         [&](std::size_t r) { return system.matrix.row(r); });
}

/// Distribution over the combined rows [A'; P] (indices as in combined_system).
inline RowDistribution build_distribution(const SamplingStrategy& strategy, const FeasibilitySystem& fs) {
  return detail::build_distribution_impl(strategy, fs.combined_rows(), fs.base_rows(),
                                         [&](std::size_t r) { return fs.row(r); });
}

/// beta distinct rows, without replacement, by sequential weighted draws with
/// renormalization. Redrawing a duplicate from the full distribution has the
/// same law as drawing from the renormalized remainder; after a run of
/// duplicates the remainder is scanned explicitly.
inline void sample_rows_into(const RowDistribution& dist, std::size_t beta, Rng& rng,
                             std::vector<std::size_t>& out) {
  if (beta > dist.size())
    throw Error(ErrorCode::SampleSize,
                "sample of " + std::to_string(beta) + " from support of " + std::to_string(dist.size()));
  out.clear();
  const auto& support = dist.support();
  if (beta == dist.size()) {
    out.assign(support.begin(), support.end());
    return;
  }
  std::vector<std::size_t> positions;
  positions.reserve(beta);
  auto taken = [&](std::size_t pos) { return std::find(positions.begin(), positions.end(), pos) != positions.end(); };
  while (positions.size() < beta) {
    std::size_t pos = dist.draw_position(rng);
    int attempts = 1;
    while (taken(pos) && attempts < 64) {
      pos = dist.draw_position(rng);
      ++attempts;
    }
    if (taken(pos)) {
      double remaining = 0.0;
      for (std::size_t k = 0; k < dist.size(); ++k)
        if (!taken(k)) remaining += dist.weights()[k];
      double u = rng.uniform() * remaining;
      pos = dist.size();
      for (std::size_t k = 0; k < dist.size(); ++k) {
        if (taken(k)) continue;
        pos = k;
        u -= dist.weights()[k];
        if (u < 0.0) break;
      }
    }
    positions.push_back(pos);
  }
  for (std::size_t pos : positions) out.push_back(support[pos]);
}

inline std::vector<std::size_t> sample_rows(const RowDistribution& dist, std::size_t beta, Rng& rng) {
  std::vector<std::size_t> out;
  sample_rows_into(dist, beta, rng, out);
  return out;
}

}  // namespace kaczmarz
