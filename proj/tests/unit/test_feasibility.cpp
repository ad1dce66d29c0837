#include <gtest/gtest.h>

#include "kaczmarz/feasibility.hpp"
#include "kaczmarz/random.hpp"

using namespace kaczmarz;

TEST(BinarizeRhs, ZeroMapsToPlusOne) {
  // A x* = (-2, 0, 3)
  const auto a = DenseMatrix::from_rows({{-2}, {0}, {3}});
  EXPECT_EQ(binarize_rhs(a, Vector{1.0}), (Vector{-1, 1, 1}));
}

TEST(BinarizeRhs, ZeroSolutionAllPositive) {
  Rng rng(1);
  const auto a = gaussian_matrix(6, 3, rng);
  EXPECT_EQ(binarize_rhs(a, Vector(3, 0.0)), Vector(6, 1.0));
}

TEST(BinarizeRhs, MatchesElementwiseSignOracle) {
  Rng rng(2);
  const auto a = gaussian_matrix(5, 3, rng);
  const Vector x = gaussian_vector(3, rng);
  const Vector labels = binarize_rhs(a, x);
  for (std::size_t i = 0; i < 5; ++i) {
    const double s = a(i, 0) * x[0] + a(i, 1) * x[1] + a(i, 2) * x[2];
    EXPECT_EQ(labels[i], s < 0 ? -1.0 : 1.0);
  }
}

TEST(HadamardTransform, SignAlgebra) {
  const auto a = DenseMatrix::from_rows({{1, 2}, {3, -4}});
  const auto fs = hadamard_transform(a, Vector{1, -1});
  EXPECT_EQ(fs.base.matrix, DenseMatrix::from_rows({{-1, -2}, {3, -4}}));
  EXPECT_EQ(fs.base.rhs, (Vector{0, 0}));
  EXPECT_EQ(fs.base.relation, Relation::LessEqual);
}

TEST(HadamardTransform, RejectsNonUnitLabels) {
  const auto a = DenseMatrix::from_rows({{1, 2}, {3, -4}});
  try {
    hadamard_transform(a, Vector{1, 0.5});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidLabel);
  }
}

TEST(HadamardTransform, GroundTruthStrictlyFeasible) {
  // (A'x*)_i = -|A_i x*| < 0 whenever A_i x* != 0; also the sign equivalence
  // sign(<A_i, x>) = b_i  <=>  (A'x)_i < 0 for x with <A_i, x> != 0.
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = gaussian_matrix(20, 4, rng);
    const Vector x_star = gaussian_vector(4, rng);
    const Vector labels = binarize_rhs(a, x_star);
    const auto fs = hadamard_transform(a, labels);
    const Vector ax = multiply(a, x_star);
    const Vector apx = multiply(fs.base.matrix, x_star);
    for (std::size_t i = 0; i < 20; ++i) {
      ASSERT_NE(ax[i], 0.0);
      EXPECT_LT(apx[i], 0.0);
      EXPECT_NEAR(apx[i], -std::abs(ax[i]), 1e-12 * (1 + std::abs(ax[i])));
    }
    const Vector x = gaussian_vector(4, rng);
    const Vector ax2 = multiply(a, x);
    const Vector apx2 = multiply(fs.base.matrix, x);
    for (std::size_t i = 0; i < 20; ++i) {
      const double sign = ax2[i] < 0 ? -1.0 : 1.0;
      EXPECT_EQ(sign == labels[i], apx2[i] < 0.0);
    }
  }
}

TEST(PairIndexMap, LexicographicSmallCases) {
  PairIndexMap map(3);
  EXPECT_EQ(map.size(), 3u);
  EXPECT_EQ(map.pair(0), (std::pair<std::size_t, std::size_t>{0, 1}));
  EXPECT_EQ(map.pair(1), (std::pair<std::size_t, std::size_t>{0, 2}));
  EXPECT_EQ(map.pair(2), (std::pair<std::size_t, std::size_t>{1, 2}));
  PairIndexMap four(4);
  EXPECT_EQ(pair_rank(four, 0, 1), 0u);
  EXPECT_EQ(pair_rank(four, 2, 3), 5u);
}

TEST(PairIndexMap, ExhaustiveRoundTrip) {
  for (std::size_t m : {2u, 3u, 50u, 240u}) {
    PairIndexMap map(m);
    std::size_t h = 0;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i + 1; j < m; ++j, ++h) {
        ASSERT_EQ(map.rank(i, j), h);
        ASSERT_EQ(map.pair(h), (std::pair<std::size_t, std::size_t>{i, j}));
      }
    EXPECT_EQ(h, map.size());
  }
}

TEST(PairIndexMap, InvalidIndices) {
  PairIndexMap map(4);
  EXPECT_THROW(map.rank(1, 1), Error);
  EXPECT_THROW(map.rank(2, 1), Error);
  EXPECT_THROW(map.rank(0, 4), Error);
  EXPECT_THROW(map.pair(6), Error);
  try {
    pair_rank(map, 1, 1);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IndexOutOfRange);
  }
}

TEST(PairwiseDifferences, RowsFollowCanonicalOrder) {
  const auto base = DenseMatrix::from_rows({{1, 0}, {0, 2}, {3, 3}});
  const auto [p, map] = pairwise_differences(base);
  EXPECT_EQ(p, DenseMatrix::from_rows({{1, -2}, {-2, -3}, {-3, -1}}));
  EXPECT_EQ(map.size(), 3u);
}

TEST(PairwiseDifferences, BinomialCountAndZeroRows) {
  Rng rng(4);
  auto base = gaussian_matrix(240, 12, rng);
  const auto [p, map] = pairwise_differences(base);
  EXPECT_EQ(p.rows(), 28680u);

  auto dup = DenseMatrix::from_rows({{1, 2}, {1, 2}, {0, 1}});
  const auto [pd, md] = pairwise_differences(dup);
  EXPECT_EQ(squared_norm(pd.row(md.rank(0, 1))), 0.0);
}

TEST(PairwiseDifferences, TooFewRows) {
  try {
    pairwise_differences(DenseMatrix::from_rows({{1, 2}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooFewRows);
  }
}

TEST(PairwiseDifferences, LinearInScale) {
  Rng rng(5);
  const auto base = gaussian_matrix(9, 3, rng);
  DenseMatrix scaled = base;
  for (double& v : scaled.entries()) v *= -2.5;
  const auto [p, m1] = pairwise_differences(base);
  const auto [ps, m2] = pairwise_differences(scaled);
  for (std::size_t k = 0; k < p.entries().size(); ++k)
    EXPECT_NEAR(ps.entries()[k], -2.5 * p.entries()[k], 1e-14);
}

TEST(CombinedSystem, ShapeAndViews) {
  Rng rng(6);
  const auto a = gaussian_matrix(240, 12, rng);
  const Vector x = gaussian_vector(12, rng);
  auto fs = hadamard_transform(a, binarize_rhs(a, x));
  attach_pairwise_differences(fs);
  const auto combined = combined_system(fs);
  EXPECT_EQ(combined.rows(), 28920u);
  EXPECT_EQ(combined.cols(), 12u);
  EXPECT_EQ(fs.combined_rows(), 28920u);
  for (std::size_t r : {0u, 239u, 240u, 1000u, 28919u}) {
    const auto view = fs.row(r);
    const auto mat = combined.matrix.row(r);
    ASSERT_TRUE(std::equal(view.begin(), view.end(), mat.begin()));
  }
}

TEST(CombinedSystem, WithoutPairsEqualsBase) {
  Rng rng(7);
  const auto a = gaussian_matrix(10, 3, rng);
  const auto fs = hadamard_transform(a, Vector(10, 1.0));
  const auto combined = combined_system(fs);
  EXPECT_EQ(combined.matrix, fs.base.matrix);
}

TEST(CombinedSystem, PairRowsCanExcludeGroundTruth) {
  Rng rng(8);
  const auto a = gaussian_matrix(30, 4, rng);
  const Vector x = gaussian_vector(4, rng);
  auto fs = hadamard_transform(a, binarize_rhs(a, x));
  attach_pairwise_differences(fs);
  const std::size_t violated = count_violated_pair_rows(fs, x);
  // (A'_i - A'_j) x* = |A_j x*| - |A_i x*|: roughly half the pairs point each way.
  EXPECT_GT(violated, 0u);
  EXPECT_LT(violated, fs.pair_count());
}
