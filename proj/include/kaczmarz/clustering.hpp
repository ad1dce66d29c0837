#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "kaczmarz/dense.hpp"
#include "kaczmarz/matgen.hpp"
#include "kaczmarz/random.hpp"

namespace kaczmarz {

/// s_i = |<a_i, x_ref>|
inline Vector score_rows(const DenseMatrix& a, std::span<const double> x_ref) {
  Vector s = multiply(a, x_ref);
  for (double& v : s) v = std::abs(v);
  return s;
}

/// Indices 0..n-1 ordered by key, ties by index.
inline std::vector<std::size_t> argsort(std::span<const double> keys) {
  std::vector<std::size_t> order(keys.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
  return order;
}

struct Coreset {
  LinearSystem system;
  std::vector<std::size_t> kept;  // ascending original row indices
};

inline std::size_t coreset_size(double c, std::size_t n, std::size_t m) {
  const double k = std::round(c * static_cast<double>(n));
  return std::min(static_cast<std::size_t>(std::max(k, 1.0)), m);
}

/// Keeps the min(round(c n), m) rows with the smallest |<a_i, x_ref>|.
inline Coreset extract_coreset(const LinearSystem& system, double c, std::span<const double> x_ref) {
  detail::require(c * static_cast<double>(system.cols()) >= 1.0, ErrorCode::InvalidArgument,
                  "coreset factor gives fewer than one row");
  const std::size_t k = coreset_size(c, system.cols(), system.rows());
  const Vector scores = score_rows(system.matrix, x_ref);
  std::vector<std::size_t> order = argsort(scores);
  order.resize(k);
  std::sort(order.begin(), order.end());

  Coreset out;
  out.kept = order;
  out.system.matrix = system.matrix.select_rows(order);
  out.system.rhs.reserve(k);
  for (std::size_t i : order) out.system.rhs.push_back(system.rhs[i]);
  out.system.relation = system.relation;
  out.system.ground_truth = system.ground_truth;
  return out;
}

enum class ClusterCriterion { NormalizedDistance, InnerProduct };

inline std::string_view to_string(ClusterCriterion c) {
  return c == ClusterCriterion::NormalizedDistance ? "normalized-distance" : "inner-product";
}

inline ClusterCriterion parse_cluster_criterion(std::string_view name) {
  if (name == "normalized-distance") return ClusterCriterion::NormalizedDistance;
  if (name == "inner-product") return ClusterCriterion::InnerProduct;
  throw Error(ErrorCode::Config, "unknown cluster criterion '" + std::string(name) + "'");
}

struct ClusterPartition {
  std::vector<std::vector<std::size_t>> clusters;
  std::vector<Vector> centroids;
  double epsilon = 0.0;
  ClusterCriterion criterion = ClusterCriterion::NormalizedDistance;

  std::size_t size() const noexcept { return clusters.size(); }
};

namespace detail {

inline Vector normalized(std::span<const double> v) {
  Vector out(v.begin(), v.end());
  const double len = norm2(out);
  if (len > 0.0)
    for (double& x : out) x /= len;
  return out;
}

/// Smaller is closer. Normalized distance compares directions; the inner
/// product criterion is the literal "<a_k, centroid> < eps" test.
inline double cluster_affinity(ClusterCriterion criterion, std::span<const double> row_dir,
                               std::span<const double> row, std::span<const double> centroid) {
  if (criterion == ClusterCriterion::InnerProduct) return dot(row, centroid);
  return distance(row_dir, normalized(centroid));
}

inline void recompute_centroids(const DenseMatrix& a, ClusterPartition& p) {
  p.centroids.assign(p.clusters.size(), Vector(a.cols(), 0.0));
  for (std::size_t c = 0; c < p.clusters.size(); ++c) {
    for (std::size_t i : p.clusters[c]) axpy(1.0, a.row(i), p.centroids[c]);
    const double count = static_cast<double>(p.clusters[c].size());
    for (double& x : p.centroids[c]) x /= count;
  }
}

}  // namespace detail

/// Greedy epsilon-cover: one pass over the rows in order. A row joins the
/// closest existing cluster when that affinity is below eps, otherwise it
/// opens a new cluster. Centroids are running means. Zero rows are skipped.
inline ClusterPartition epsilon_cover(const DenseMatrix& a, double epsilon,
                                      ClusterCriterion criterion = ClusterCriterion::NormalizedDistance) {
  detail::require(epsilon > 0.0, ErrorCode::InvalidArgument, "epsilon must be positive");
  ClusterPartition p;
  p.epsilon = epsilon;
  p.criterion = criterion;
  std::vector<Vector> sums;
  std::vector<Vector> directions;  // normalized centroids, cached
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const auto row = a.row(k);
    if (squared_norm(row) == 0.0) continue;
    const Vector dir = detail::normalized(row);
    std::size_t best = p.clusters.size();
    double best_value = INFINITY;
    for (std::size_t c = 0; c < p.clusters.size(); ++c) {
      const double v = criterion == ClusterCriterion::InnerProduct ? dot(row, p.centroids[c])
                                                                    : distance(dir, directions[c]);
      if (v < best_value) {
        best_value = v;
        best = c;
      }
    }
    if (best < p.clusters.size() && best_value < epsilon) {
      p.clusters[best].push_back(k);
      axpy(1.0, row, sums[best]);
      const double count = static_cast<double>(p.clusters[best].size());
      for (std::size_t j = 0; j < a.cols(); ++j) p.centroids[best][j] = sums[best][j] / count;
      directions[best] = detail::normalized(p.centroids[best]);
    } else {
      p.clusters.push_back({k});
      sums.emplace_back(row.begin(), row.end());
      p.centroids.emplace_back(row.begin(), row.end());
      directions.push_back(dir);
    }
  }
  return p;
}

/// One Lloyd-style pass: every clustered row moves to its closest centroid,
/// empty clusters are dropped, centroids are recomputed.
inline ClusterPartition reassign(const DenseMatrix& a, const ClusterPartition& p) {
  std::vector<std::vector<std::size_t>> next(p.clusters.size());
  std::vector<std::size_t> rows;
  for (const auto& c : p.clusters) rows.insert(rows.end(), c.begin(), c.end());
  std::sort(rows.begin(), rows.end());
  for (std::size_t i : rows) {
    const auto row = a.row(i);
    const Vector dir = detail::normalized(row);
    std::size_t best = 0;
    double best_value = INFINITY;
    for (std::size_t c = 0; c < p.centroids.size(); ++c) {
      const double v = detail::cluster_affinity(p.criterion, dir, row, p.centroids[c]);
      if (v < best_value) {
        best_value = v;
        best = c;
      }
    }
    next[best].push_back(i);
  }
  ClusterPartition out;
  out.epsilon = p.epsilon;
  out.criterion = p.criterion;
  for (auto& c : next)
    if (!c.empty()) out.clusters.push_back(std::move(c));
  detail::recompute_centroids(a, out);
  return out;
}

/// Sweeps eps over (0, 2] and returns the first value giving a cluster count
/// in [min_clusters, max_clusters]; if none does, the value whose count is
/// closest to that range.
inline double choose_epsilon(const DenseMatrix& a, std::size_t min_clusters, std::size_t max_clusters,
                             ClusterCriterion criterion = ClusterCriterion::NormalizedDistance,
                             std::size_t grid = 80) {
  double best_eps = 2.0;
  std::size_t best_gap = SIZE_MAX;
  for (std::size_t g = 1; g <= grid; ++g) {
    const double eps = 2.0 * static_cast<double>(g) / static_cast<double>(grid);
    const std::size_t count = epsilon_cover(a, eps, criterion).size();
    if (count >= min_clusters && count <= max_clusters) return eps;
    const std::size_t gap = count < min_clusters ? min_clusters - count : count - max_clusters;
    if (gap < best_gap) {
      best_gap = gap;
      best_eps = eps;
    }
  }
  return best_eps;
}

/// argmin_c |<x, centroid_c>|, ties to the lowest cluster index.
inline std::size_t best_cluster(const ClusterPartition& p, std::span<const double> x) {
  if (p.clusters.empty()) throw Error(ErrorCode::EmptySupport, "partition has no clusters");
  std::size_t best = 0;
  double best_value = INFINITY;
  for (std::size_t c = 0; c < p.centroids.size(); ++c) {
    const double v = std::abs(dot(x, p.centroids[c]));
    if (v < best_value) {
      best_value = v;
      best = c;
    }
  }
  return best;
}

enum class ClusterSamplingMode {
  BestCluster,    // one random row of the best cluster every step
  SweepThenBest,  // one random row of each cluster in turn, then best-cluster steps
};

/// Row sampler for cluster-guided SKM. Draws `beta` rows (without
/// replacement, capped at the cluster size) from the selected cluster.
class ClusterGuidedSampler {
 public:
  ClusterGuidedSampler(const DenseMatrix& a, ClusterPartition partition,
                       ClusterSamplingMode mode = ClusterSamplingMode::BestCluster, std::size_t beta = 1,
                       std::size_t reassign_every = 0)
      : matrix_(&a), partition_(std::move(partition)), mode_(mode), beta_(beta), reassign_every_(reassign_every) {
    if (partition_.clusters.empty()) throw Error(ErrorCode::EmptySupport, "partition has no clusters");
    for (const auto& c : partition_.clusters)
      detail::require(!c.empty(), ErrorCode::InvalidArgument, "partition contains an empty cluster");
  }

  void operator()(std::size_t k, std::span<const double> x, Rng& rng, std::vector<std::size_t>& tau) {
    if (reassign_every_ > 0 && k > 1 && (k - 1) % reassign_every_ == 0) partition_ = reassign(*matrix_, partition_);
    const std::size_t p = partition_.size();
    const std::size_t c = mode_ == ClusterSamplingMode::SweepThenBest && k <= p ? k - 1 : best_cluster(partition_, x);
    const auto& members = partition_.clusters[c];
    last_cluster_ = c;
    tau.clear();
    const std::size_t take = std::min(beta_, members.size());
    while (tau.size() < take) {
      const std::size_t r = members[rng.uniform_index(members.size())];
      if (std::find(tau.begin(), tau.end(), r) == tau.end()) tau.push_back(r);
    }
  }

  const ClusterPartition& partition() const noexcept { return partition_; }
  std::size_t last_cluster() const noexcept { return last_cluster_; }

 private:
  const DenseMatrix* matrix_;
  ClusterPartition partition_;
  ClusterSamplingMode mode_;
  std::size_t beta_;
  std::size_t reassign_every_;
  std::size_t last_cluster_ = 0;
};

/// Best-cluster choice followed by one uniform member of that cluster.
inline std::size_t cluster_guided_sample(const ClusterPartition& p, std::span<const double> x, Rng& rng) {
  const auto& members = p.clusters[best_cluster(p, x)];
  detail::require(!members.empty(), ErrorCode::EmptySupport, "selected cluster is empty");
  return members[rng.uniform_index(members.size())];
}

struct ReductionEvent {
  std::size_t iteration;
  std::size_t active_size;
  friend bool operator==(const ReductionEvent&, const ReductionEvent&) = default;
};

struct ReductionSchedule {
  std::vector<ReductionEvent> events;
  std::size_t working_size = 0;
  std::size_t floor = 0;
};

/// Active-set halving at iterations 100 * 2^k with sizes ceil(m / 2^{k+1}),
/// clamped at 4n; the schedule ends once the floor is reached.
inline ReductionSchedule build_schedule(std::size_t m, std::size_t n) {
  detail::require(m >= 1 && n >= 1, ErrorCode::InvalidArgument, "m and n must be >= 1");
  ReductionSchedule s;
  s.working_size = 2 * n;
  s.floor = 4 * n;
  std::size_t size = m;
  std::size_t iteration = 100;
  while (size > s.floor) {
    size = std::max((size + 1) / 2, s.floor);
    s.events.push_back({iteration, size});
    iteration *= 2;
  }
  return s;
}

/// The `count` rows of `active` with the smallest |<a_i, x> - b_i| (or the
/// signed residual when `signed_residual`), ordered by that key then index.
inline std::vector<std::size_t> select_best_rows(const LinearSystem& system, std::span<const std::size_t> active,
                                                 std::span<const double> x, std::size_t count,
                                                 bool signed_residual = false) {
  if (count > active.size())
    throw Error(ErrorCode::SampleSize, "asked for " + std::to_string(count) + " of " +
                                           std::to_string(active.size()) + " active rows");
  std::vector<std::pair<double, std::size_t>> keyed;
  keyed.reserve(active.size());
  for (std::size_t i : active) {
    const double r = dot(system.matrix.row(i), x) - system.rhs[i];
    keyed.emplace_back(signed_residual ? r : std::abs(r), i);
  }
  std::sort(keyed.begin(), keyed.end());
  std::vector<std::size_t> out(count);
  for (std::size_t k = 0; k < count; ++k) out[k] = keyed[k].second;
  return out;
}

/// Online active-set reduction. The working set is the 2n best rows of the
/// active set; at each schedule event the active set shrinks to its best
/// rows at the current iterate and the working set is re-chosen. An event at
/// iteration e fires once e steps have completed.
class OnlineReductionSampler {
 public:
  OnlineReductionSampler(const LinearSystem& system, ReductionSchedule schedule, std::size_t beta = 1,
                         bool signed_residual = false)
      : system_(&system), schedule_(std::move(schedule)), beta_(beta), signed_(signed_residual) {
    active_.resize(system.rows());
    std::iota(active_.begin(), active_.end(), std::size_t{0});
    std::vector<std::size_t> nonzero;
    for (std::size_t i : active_)
      if (squared_norm(system.matrix.row(i)) > 0.0) nonzero.push_back(i);
    active_ = std::move(nonzero);
    if (active_.empty()) throw Error(ErrorCode::EmptySupport, "system has no nonzero rows");
  }

  void operator()(std::size_t k, std::span<const double> x, Rng& rng, std::vector<std::size_t>& tau) {
    if (working_.empty()) refresh_working(x);
    while (next_event_ < schedule_.events.size() && k - 1 >= schedule_.events[next_event_].iteration) {
      const std::size_t target = std::min(schedule_.events[next_event_].active_size, active_.size());
      active_ = select_best_rows(*system_, active_, x, target, signed_);
      std::sort(active_.begin(), active_.end());
      refresh_working(x);
      history_.push_back({k - 1, active_.size()});
      ++next_event_;
    }
    tau.clear();
    const std::size_t take = std::min(beta_, working_.size());
    while (tau.size() < take) {
      const std::size_t r = working_[rng.uniform_index(working_.size())];
      if (std::find(tau.begin(), tau.end(), r) == tau.end()) tau.push_back(r);
    }
  }

  const std::vector<std::size_t>& active() const noexcept { return active_; }
  const std::vector<std::size_t>& working() const noexcept { return working_; }
  /// (iteration, active size) for each event applied so far.
  const std::vector<ReductionEvent>& history() const noexcept { return history_; }

 private:
  void refresh_working(std::span<const double> x) {
    const std::size_t count = std::min(schedule_.working_size, active_.size());
    working_ = select_best_rows(*system_, active_, x, count, signed_);
  }

  const LinearSystem* system_;
  ReductionSchedule schedule_;
  std::size_t beta_;
  bool signed_;
  std::vector<std::size_t> active_;
  std::vector<std::size_t> working_;
  std::vector<ReductionEvent> history_;
  std::size_t next_event_ = 0;
};

}  // namespace kaczmarz
