#include <gtest/gtest.h>

#include "kaczmarz/solvers.hpp"

using namespace kaczmarz;

namespace {

LinearSystem make(DenseMatrix a, Vector b, Relation rel = Relation::Equality) {
  LinearSystem s;
  s.matrix = std::move(a);
  s.rhs = std::move(b);
  s.relation = rel;
  return s;
}

// Independent projection oracle: x - lambda * r / ||a||^2 * a, written out by hand.
Vector oracle_project(const Vector& a, double b, const Vector& x, double lambda, bool inequality) {
  double ax = 0.0, aa = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    ax += a[j] * x[j];
    aa += a[j] * a[j];
  }
  double r = ax - b;
  if (inequality && r < 0.0) r = 0.0;
  Vector out = x;
  for (std::size_t j = 0; j < a.size(); ++j) out[j] -= lambda * r / aa * a[j];
  return out;
}

}  // namespace

TEST(RkStep, OneDimensionalLandsOnSolution) {
  const auto sys = make(DenseMatrix::from_rows({{2}}), {4});
  EXPECT_EQ(rk_step(sys, Vector{0}, 0, 1.0), (Vector{2}));
}

TEST(RkStep, LambdaTwoReflects) {
  const auto sys = make(DenseMatrix::from_rows({{1, 0}}), {1});
  const Vector x = rk_step(sys, Vector{3, 5}, 0, 2.0);
  EXPECT_DOUBLE_EQ(x[0], -1.0);
  EXPECT_DOUBLE_EQ(x[1], 5.0);
}

TEST(RkStep, SatisfiedInequalityUnchanged) {
  const auto sys = make(DenseMatrix::from_rows({{1, 1}}), {0}, Relation::LessEqual);
  EXPECT_EQ(rk_step(sys, Vector{-1, -2}, 0, 1.0), (Vector{-1, -2}));
  const Vector moved = rk_step(sys, Vector{1, 2}, 0, 1.0);
  EXPECT_NEAR(moved[0] + moved[1], 0.0, 1e-15);
}

TEST(RkStep, MatchesOracleAndPythagoras) {
  Rng rng(1);
  for (int t = 0; t < 200; ++t) {
    const auto a = gaussian_matrix(6, 4, rng);
    const Vector x_star = gaussian_vector(4, rng);
    const auto sys = make(a, multiply(a, x_star));
    const Vector x = gaussian_vector(4, rng);
    const std::size_t i = rng.uniform_index(6);
    const double lambda = 0.1 + 1.9 * rng.uniform();
    const Vector next = rk_step(sys, x, i, lambda);
    const Vector oracle = oracle_project(Vector(a.row(i).begin(), a.row(i).end()), sys.rhs[i], x, lambda, false);
    for (std::size_t j = 0; j < 4; ++j) ASSERT_NEAR(next[j], oracle[j], 1e-12 * (1 + std::abs(oracle[j])));
    // Exact projection is an orthogonal step toward x*: no growth in error.
    const Vector exact = rk_step(sys, x, i, 1.0);
    const double before = squared_norm(subtract(x, x_star));
    const double after = squared_norm(subtract(exact, x_star));
    const double step = squared_norm(subtract(x, exact));
    ASSERT_NEAR(before, after + step, 1e-9 * (1 + before));
    ASSERT_LE(squared_norm(subtract(next, x_star)), before * (1 + 1e-12) + 1e-12);
  }
}

TEST(RkStep, ZeroRowRejected) {
  const auto sys = make(DenseMatrix::from_rows({{0, 0}}), {1});
  try {
    rk_step(sys, Vector{1, 1}, 0, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroRow);
  }
}

TEST(SolverConfig, LambdaRange) {
  SolverConfig c;
  c.lambda = 0.0;
  EXPECT_THROW(c.validate(), Error);
  c.lambda = 2.5;
  EXPECT_THROW(c.validate(), Error);
  c.lambda = 2.0;
  EXPECT_NO_THROW(c.validate());
}

TEST(SkmSelect, PicksLargestViolationWithLowIndexTies) {
  const auto sys = make(DenseMatrix::from_rows({{1, 0}, {0, 1}, {1, 0}, {0, 1}}), {0, 0, 0, 0}, Relation::LessEqual);
  const Vector x{2, 2};
  const std::vector<std::size_t> tau{3, 1, 2, 0};
  EXPECT_EQ(select_max_residual(sys, x, tau), 0u);
  const Vector y{1, 3};
  EXPECT_EQ(select_max_residual(sys, y, tau), 1u);
  EXPECT_THROW(select_max_residual(sys, y, std::vector<std::size_t>{}), Error);
}

TEST(SkmSelect, EqualityUsesMagnitude) {
  const auto sys = make(DenseMatrix::from_rows({{1, 0}, {0, 1}}), {0, 0});
  EXPECT_EQ(select_max_residual(sys, Vector{1, -5}, std::vector<std::size_t>{0, 1}), 1u);
}

TEST(SkmSelect, MatchesBruteForceArgmax) {
  Rng rng(2);
  for (int t = 0; t < 200; ++t) {
    const auto a = gaussian_matrix(12, 3, rng);
    const auto sys = make(a, gaussian_vector(12, rng), Relation::LessEqual);
    const Vector x = gaussian_vector(3, rng);
    const auto tau = sample_rows(RowDistribution::uniform_over({0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11}), 5, rng);
    std::size_t best = tau[0];
    for (std::size_t i : tau) {
      const double ri = dot(a.row(i), x) - sys.rhs[i];
      const double rb = dot(a.row(best), x) - sys.rhs[best];
      if (ri > rb || (ri == rb && i < best)) best = i;
    }
    ASSERT_EQ(select_max_residual(sys, x, tau), best);
    const auto step = skm_step(sys, x, tau, 1.0);
    ASSERT_EQ(step.row, best);
  }
}

TEST(RunSolver, ConvergesOnConsistentSystem) {
  Rng rng(3);
  const auto gen = generate_ill_conditioned(100, 10, SpectrumSpec::explicit_ratio(5.0), rng);
  const auto sys = make_system(gen, random_unit_vector(10, rng));
  SolverConfig cfg;
  cfg.max_iterations = 20000;
  cfg.seed = 9;
  cfg.trace_stride = 100;
  const auto res = run_solver(sys, cfg, SamplingStrategy::of(StrategyKind::Uniform));
  EXPECT_LE(distance(res.x, *sys.ground_truth), 1e-10);
  EXPECT_TRUE(res.trace.consistent());
}

TEST(RunSolver, TraceLengthAndEndpoints) {
  Rng rng(4);
  const auto gen = generate_ill_conditioned(30, 3, SpectrumSpec::explicit_ratio(10.0), rng);
  const auto sys = make_system(gen, random_unit_vector(3, rng));
  for (std::size_t k : {1u, 7u, 100u, 101u}) {
    for (std::size_t stride : {1u, 3u, 10u}) {
      SolverConfig cfg;
      cfg.max_iterations = k;
      cfg.trace_stride = stride;
      const auto res = run_solver(sys, cfg, SamplingStrategy::of(StrategyKind::SquaredNorm));
      EXPECT_EQ(res.trace.size(), (k + stride - 1) / stride + 1) << k << " " << stride;
      EXPECT_EQ(res.trace.iterations.front(), 0u);
      EXPECT_EQ(res.trace.iterations.back(), k);
      EXPECT_EQ(res.trace.approximation_error.front(), norm2(*sys.ground_truth));
    }
  }
}

TEST(RunSolver, DeterministicForSeed) {
  Rng rng(5);
  const auto gen = generate_ill_conditioned(50, 5, SpectrumSpec::explicit_ratio(100.0), rng);
  const auto sys = make_system(gen, random_unit_vector(5, rng));
  SolverConfig cfg;
  cfg.max_iterations = 500;
  cfg.beta = 4;
  cfg.seed = 77;
  const auto a = run_solver(sys, cfg, SamplingStrategy::of(StrategyKind::Uniform));
  const auto b = run_solver(sys, cfg, SamplingStrategy::of(StrategyKind::Uniform));
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.trace.approximation_error, b.trace.approximation_error);
  cfg.seed = 78;
  EXPECT_NE(run_solver(sys, cfg, SamplingStrategy::of(StrategyKind::Uniform)).x, a.x);
}

TEST(RunSolver, ErrorNonIncreasingOnConsistentSystems) {
  Rng rng(6);
  for (int t = 0; t < 20; ++t) {
    const auto gen = generate_ill_conditioned(40, 4, SpectrumSpec::explicit_ratio(1e3), rng);
    const auto sys = make_system(gen, random_unit_vector(4, rng));
    SolverConfig cfg;
    cfg.max_iterations = 200;
    cfg.seed = static_cast<std::uint64_t>(t);
    cfg.beta = 1 + static_cast<std::size_t>(t % 5);
    const auto res = run_solver(sys, cfg, SamplingStrategy::of(StrategyKind::Uniform));
    for (std::size_t r = 1; r < res.trace.size(); ++r)
      ASSERT_LE(res.trace.approximation_error[r], res.trace.approximation_error[r - 1] * (1 + 1e-12) + 1e-15);
  }
}

TEST(RunSolver, ToleranceStopsEarly) {
  const auto sys = [] {
    auto s = make(DenseMatrix::from_rows({{1, 0}, {0, 1}}), {1, 1});
    s.ground_truth = Vector{1, 1};
    return s;
  }();
  SolverConfig cfg;
  cfg.max_iterations = 1000;
  cfg.beta = 2;
  cfg.stop_tolerance = 1e-12;
  const auto res = run_solver(sys, cfg, SamplingStrategy::of(StrategyKind::Uniform));
  EXPECT_EQ(res.reason, Termination::Tolerance);
  EXPECT_EQ(res.iterations, 2u);
  EXPECT_EQ(res.x, (Vector{1, 1}));
}

TEST(RunSolver, FeasibilityStop) {
  auto sys = make(DenseMatrix::from_rows({{1, 0}, {0, 1}}), {0, 0}, Relation::LessEqual);
  SolverConfig cfg;
  cfg.initial = Vector{2, 3};
  cfg.beta = 2;
  cfg.stop_when_feasible = true;
  const auto res = run_solver(sys, cfg, SamplingStrategy::of(StrategyKind::Uniform));
  EXPECT_EQ(res.reason, Termination::Degenerate);
  EXPECT_EQ(res.iterations, 2u);
}

TEST(RunSolver, ObserversSeeEveryTracePoint) {
  Rng rng(7);
  const auto gen = generate_ill_conditioned(20, 3, SpectrumSpec::explicit_ratio(10.0), rng);
  const auto sys = make_system(gen, random_unit_vector(3, rng));
  std::vector<std::size_t> seen;
  const std::vector<Observer> obs{[&](std::size_t k, std::span<const double>) { seen.push_back(k); }};
  SolverConfig cfg;
  cfg.max_iterations = 25;
  cfg.trace_stride = 10;
  const auto res = run_solver(sys, cfg, SamplingStrategy::of(StrategyKind::Uniform), obs);
  EXPECT_EQ(seen, (std::vector<std::size_t>{0, 10, 20, 25}));
  EXPECT_EQ(seen, res.trace.iterations);
}

TEST(RunSolver, BetaBeyondSupport) {
  const auto sys = make(DenseMatrix::from_rows({{1, 0}, {0, 1}}), {1, 1});
  SolverConfig cfg;
  cfg.beta = 3;
  EXPECT_THROW(run_solver(sys, cfg, SamplingStrategy::of(StrategyKind::Uniform)), Error);
}

TEST(RkBound, ClosedForm) {
  EXPECT_DOUBLE_EQ(rk_bound(1.0, 4.0, 0, 2.0), 2.0);
  EXPECT_DOUBLE_EQ(rk_bound(1.0, 4.0, 2, 1.0), 0.5625);
  EXPECT_DOUBLE_EQ(rk_bound(2.0, 4.0, 5, 1.0), 0.0);
}

TEST(RkBound, NeedsSvdAndBoundsTheMean) {
  auto bare = make(DenseMatrix::from_rows({{1, 0}}), {0});
  try {
    rk_bound(bare, 1, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingSvd);
  }

  Rng rng(8);
  const auto gen = generate_ill_conditioned(50, 5, SpectrumSpec::explicit_ratio(10.0), rng);
  const auto sys = make_system(gen, random_unit_vector(5, rng));
  const std::size_t k = 200;
  double mean_sq = 0.0;
  const int trials = 200;
  for (int t = 0; t < trials; ++t) {
    SolverConfig cfg;
    cfg.max_iterations = k;
    cfg.seed = static_cast<std::uint64_t>(t);
    cfg.trace_stride = k;
    const auto res = run_solver(sys, cfg, SamplingStrategy::of(StrategyKind::SquaredNorm));
    mean_sq += squared_norm(subtract(res.x, *sys.ground_truth)) / trials;
  }
  EXPECT_LE(mean_sq, rk_bound(sys, k, 1.0));
}
