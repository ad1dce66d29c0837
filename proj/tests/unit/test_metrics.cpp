#include <gtest/gtest.h>

#include <sstream>

#include "kaczmarz/metrics.hpp"
#include "kaczmarz/solvers.hpp"

using namespace kaczmarz;

TEST(Accuracy, HandCase) {
  const auto a = DenseMatrix::from_rows({{1, 0}, {0, 1}, {-1, -1}});
  EXPECT_DOUBLE_EQ(classification_accuracy(a, Vector{1, -1, -1}, Vector{1, 1}), 2.0 / 3.0);
  // sign(0) = +1
  EXPECT_DOUBLE_EQ(classification_accuracy(a, Vector{1, 1, 1}, Vector{0, 0}), 1.0);
}

TEST(Accuracy, GroundTruthScoresOne) {
  Rng rng(1);
  const auto a = gaussian_matrix(50, 4, rng);
  const Vector x = gaussian_vector(4, rng);
  const auto labels = binarize_rhs(a, x);
  EXPECT_EQ(classification_accuracy(a, labels, x), 1.0);
  Vector neg = x;
  for (double& v : neg) v = -v;
  EXPECT_EQ(classification_accuracy(a, labels, neg), 0.0);
}

TEST(SingularErrors, ParsevalAgainstApproximationError) {
  Rng rng(2);
  for (int t = 0; t < 30; ++t) {
    const DenseMatrix v = generate_orthogonal(6, rng);
    const Vector x = gaussian_vector(6, rng);
    const Vector xs = gaussian_vector(6, rng);
    const Vector s = singular_errors(x, xs, v);
    const double e = approximation_error(x, xs);
    EXPECT_NEAR(squared_norm(s), e * e, 1e-10 * (1 + e * e));
    for (double y : s) EXPECT_GE(y, 0.0);
  }
}

TEST(SingularErrors, IdentityGivesComponents) {
  EXPECT_EQ(singular_errors(Vector{1, -3}, Vector{0, 0}, DenseMatrix::identity(2)), (Vector{1, 3}));
}

TEST(Chebyshev, Interval) {
  // x <= 1, -x <= 1 in one dimension, box 10.
  const auto r = chebyshev_center(DenseMatrix::from_rows({{1}, {-1}}), Vector{1, 1}, 10.0);
  EXPECT_NEAR(r.center[0], 0.0, 1e-10);
  EXPECT_NEAR(r.radius, 1.0, 1e-10);
}

TEST(Chebyshev, Square) {
  const auto a = DenseMatrix::from_rows({{1, 0}, {-1, 0}, {0, 1}, {0, -1}});
  const auto r = chebyshev_center(a, Vector{1, 1, 1, 1}, 5.0);
  EXPECT_NEAR(r.center[0], 0.0, 1e-10);
  EXPECT_NEAR(r.center[1], 0.0, 1e-10);
  EXPECT_NEAR(r.radius, 1.0, 1e-10);
}

TEST(Chebyshev, RightTriangle) {
  // x >= 0, y >= 0, x + y <= 1: inradius (2 - sqrt 2) / 2.
  const auto a = DenseMatrix::from_rows({{-1, 0}, {0, -1}, {1, 1}});
  const auto r = chebyshev_center(a, Vector{0, 0, 1}, 5.0);
  const double expected = (2.0 - std::sqrt(2.0)) / 2.0;
  EXPECT_NEAR(r.radius, expected, 1e-10);
  EXPECT_NEAR(r.center[0], expected, 1e-10);
  EXPECT_NEAR(r.center[1], expected, 1e-10);
}

TEST(Chebyshev, BoxLimitsOpenCone) {
  // x <= 0 in 2D with box 1: the ball of radius 0.5 centred at (-0.5, 0).
  const auto r = chebyshev_center(DenseMatrix::from_rows({{1, 0}}), 1.0);
  EXPECT_NEAR(r.radius, 0.5, 1e-10);
  EXPECT_NEAR(r.center[0], -0.5, 1e-10);
}

TEST(Chebyshev, Infeasible) {
  const auto a = DenseMatrix::from_rows({{1}, {-1}});
  try {
    chebyshev_center(a, Vector{-1, -1}, 10.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Infeasible);
  }
}

TEST(Chebyshev, ZeroRow) {
  EXPECT_THROW(chebyshev_center(DenseMatrix::from_rows({{0, 0}}), 1.0), Error);
}

TEST(Chebyshev, BallInsideEveryConstraintAndSomeAreTight) {
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    const auto a = gaussian_matrix(15, 3, rng);
    const Vector x = gaussian_vector(3, rng);
    const auto fs = hadamard_transform(a, binarize_rhs(a, x));
    const double box = 2.0;
    const auto r = chebyshev_center(fs.base.matrix, box);
    ASSERT_GT(r.radius, 0.0);
    std::size_t tight = 0;
    for (std::size_t i = 0; i < 15; ++i) {
      const auto row = fs.base.matrix.row(i);
      const double slack = -dot(row, r.center) / norm2(row) - r.radius;
      ASSERT_GE(slack, -1e-9);
      if (slack < 1e-8) ++tight;
    }
    for (std::size_t j = 0; j < 3; ++j) {
      const double slack = box - std::abs(r.center[j]) - r.radius;
      ASSERT_GE(slack, -1e-9);
      if (slack < 1e-8) ++tight;
    }
    EXPECT_GE(tight, 1u);
  }
}

TEST(TraceRecorder, RecordsOnlyConfiguredSeries) {
  Rng rng(4);
  const auto gen = generate_ill_conditioned(30, 3, SpectrumSpec::explicit_ratio(10.0), rng);
  const auto sys = make_system(gen, random_unit_vector(3, rng));
  TraceRecorder recorder({sys.ground_truth, std::nullopt, nullptr, nullptr, &gen.v_factor()});
  const std::vector<Observer> obs{as_observer(recorder)};
  SolverConfig cfg;
  cfg.max_iterations = 40;
  cfg.trace_stride = 10;
  const auto res = run_solver(sys, cfg, SamplingStrategy::of(StrategyKind::Uniform), obs);
  const auto& tr = recorder.trace();
  EXPECT_TRUE(tr.consistent());
  EXPECT_EQ(tr.iterations, res.trace.iterations);
  EXPECT_EQ(tr.approximation_error, res.trace.approximation_error);
  EXPECT_FALSE(tr.has_chebyshev_error());
  EXPECT_FALSE(tr.has_accuracy());
  EXPECT_EQ(tr.singular_error_count(), 3u);

  std::ostringstream csv;
  write_trace_csv(csv, tr);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "iteration,approx_error,sing_err_1,sing_err_2,sing_err_3");
}
