#include <gtest/gtest.h>

#include <sstream>

#include "kaczmarz/dense.hpp"
#include "kaczmarz/linalg.hpp"
#include "kaczmarz/matgen.hpp"
#include "kaczmarz/random.hpp"

using namespace kaczmarz;

namespace {

double orthogonality_defect(const DenseMatrix& q) {
  const DenseMatrix g = multiply(q.transpose(), q);
  double worst = 0.0;
  for (std::size_t i = 0; i < g.rows(); ++i)
    for (std::size_t j = 0; j < g.cols(); ++j) worst = std::max(worst, std::abs(g(i, j) - (i == j ? 1.0 : 0.0)));
  return worst;
}

DenseMatrix random_matrix(std::size_t m, std::size_t n, Rng& rng) { return gaussian_matrix(m, n, rng); }

}  // namespace

TEST(DenseMatrix, RejectsWrongEntryCount) {
  EXPECT_THROW(DenseMatrix(2, 2, {1.0, 2.0, 3.0}), Error);
}

TEST(DenseMatrix, RowViewsAreContiguous) {
  const auto a = DenseMatrix::from_rows({{1, 2, 3}, {4, 5, 6}});
  ASSERT_EQ(a.row(1).size(), 3u);
  EXPECT_EQ(a.row(1)[0], 4.0);
  EXPECT_EQ(a.column(2), (Vector{3, 6}));
}

TEST(DenseMatrix, MultiplyAgreesWithTransposeProduct) {
  Rng rng(3);
  const auto a = random_matrix(7, 4, rng);
  const Vector y = gaussian_vector(7, rng);
  const Vector lhs = multiply_transpose(a, y);
  const Vector rhs = multiply(a.transpose(), y);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(lhs[i], rhs[i], 1e-13);
}

TEST(DenseMatrix, CsvUsesSeventeenDigits) {
  std::ostringstream out;
  write_csv(out, DenseMatrix::from_rows({{0.1, 1.0 / 3.0}}));
  EXPECT_EQ(out.str(), "0.10000000000000001,0.33333333333333331\n");
}

TEST(HouseholderQr, ReconstructsInput) {
  Rng rng(11);
  const auto a = random_matrix(9, 5, rng);
  HouseholderQr qr(a);
  const DenseMatrix back = multiply(qr.q(5), qr.r());
  for (std::size_t i = 0; i < 9; ++i)
    for (std::size_t j = 0; j < 5; ++j) EXPECT_NEAR(back(i, j), a(i, j), 1e-12);
  EXPECT_LE(orthogonality_defect(qr.q()), 1e-12);
}

TEST(HouseholderQr, ThinFactorMatchesLeadingColumnsBitForBit) {
  Rng a_rng(5), b_rng(5);
  const DenseMatrix full = generate_orthogonal(30, a_rng);
  const DenseMatrix thin = generate_orthogonal_columns(30, 4, b_rng);
  EXPECT_EQ(full.leading_columns(4), thin);
}

TEST(HouseholderQr, ZeroColumnLeavesZeroPivot) {
  const auto a = DenseMatrix::from_rows({{1, 0}, {2, 0}, {3, 0}});
  HouseholderQr qr(a);
  EXPECT_EQ(qr.r_diagonal(1), 0.0);
}

TEST(LeastSquares, IdentityReturnsRhs) {
  const Vector b{1.5, -2.0, 7.0};
  const Vector x = least_squares(DenseMatrix::identity(3), b);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(x[i], b[i], 1e-15);
}

TEST(LeastSquares, MatchesHandSolvedNormalEquations) {
  // A^T A = [[2,1],[1,2]], A^T b = [2,2]  ->  x = [2/3, 2/3]
  const auto a = DenseMatrix::from_rows({{1, 0}, {0, 1}, {1, 1}});
  const Vector x = least_squares(a, Vector{1, 1, 1});
  EXPECT_NEAR(x[0], 2.0 / 3.0, 1e-14);
  EXPECT_NEAR(x[1], 2.0 / 3.0, 1e-14);
}

TEST(LeastSquares, RecoversConsistentSolution) {
  Rng rng(21);
  const auto a = random_matrix(40, 6, rng);
  const Vector x_star = gaussian_vector(6, rng);
  const Vector x = least_squares(a, multiply(a, x_star));
  EXPECT_LE(distance(x, x_star), 1e-8 * norm2(x_star));
}

TEST(LeastSquares, ResidualIsOrthogonalToColumns) {
  Rng rng(8);
  for (double kappa : {1.0, 1e4, 1e7}) {
    Rng gen_rng = rng.split(static_cast<std::uint64_t>(kappa));
    const auto gen = generate_ill_conditioned(200, 10, SpectrumSpec::explicit_ratio(kappa), gen_rng, UFactor::Thin);
    const Vector b = gaussian_vector(200, rng);
    const Vector x = least_squares(gen.matrix(), b);
    Vector r = multiply(gen.matrix(), x);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
    const Vector g = multiply_transpose(gen.matrix(), r);
    EXPECT_LE(norm2(g), 1e-8 * gen.matrix().frobenius_norm() * norm2(b)) << "kappa " << kappa;
  }
}

TEST(LeastSquares, RankDeficiencyNamesPivot) {
  const auto a = DenseMatrix::from_rows({{1, 2}, {2, 4}, {3, 6}});
  try {
    least_squares(a, Vector{1, 2, 3});
    FAIL() << "expected rank deficiency";
  } catch (const RankDeficientError& e) {
    EXPECT_EQ(e.code(), ErrorCode::RankDeficient);
    EXPECT_EQ(e.pivot(), 1u);
  }
}

TEST(SmallestSingularVector, DiagonalCase) {
  const auto a = DenseMatrix::from_rows({{3, 0}, {0, 1}});
  const auto result = smallest_right_singular_vector(a);
  EXPECT_NEAR(std::abs(result.vector[1]), 1.0, 1e-10);
  EXPECT_NEAR(result.vector[0], 0.0, 1e-8);
  EXPECT_NEAR(result.sigma, 1.0, 1e-10);
  EXPECT_GT(result.vector[1], 0.0);  // sign convention
}

TEST(SmallestSingularVector, MatchesGeneratorFactor) {
  Rng rng(99);
  const auto gen = generate_ill_conditioned(240, 12, SpectrumSpec::exponential_decay(), rng);
  const auto result = smallest_right_singular_vector(gen.matrix());
  const Vector vn = gen.v_factor().column(11);
  EXPECT_GE(std::abs(dot(result.vector, vn)), 1.0 - 1e-6);
  EXPECT_NEAR(result.sigma, std::exp(1.0), 1e-6);
}

TEST(SmallestSingularVector, DegenerateBottomPair) {
  Rng rng(4);
  const auto gen = generate_ill_conditioned(50, 5, SpectrumSpec::explicit_values({5, 4, 3, 0.5, 0.5}), rng);
  const auto result = smallest_right_singular_vector(gen.matrix());
  EXPECT_NEAR(norm2(result.vector), 1.0, 1e-12);
  EXPECT_NEAR(norm2(multiply(gen.matrix(), result.vector)), 0.5, 1e-8);
}

TEST(SmallestSingularVector, ReportsNonConvergence) {
  Rng rng(4);
  const auto gen = generate_ill_conditioned(50, 5, SpectrumSpec::explicit_values({5, 4, 3, 1.0, 0.999}), rng);
  try {
    smallest_right_singular_vector(gen.matrix(), 1e-16, 1);
    FAIL() << "expected convergence error";
  } catch (const ConvergenceError& e) {
    EXPECT_GT(e.residual(), 0.0);
  }
}

TEST(Rng, SplitIsIndependentOfParentConsumption) {
  Rng a(17), b(17);
  for (int i = 0; i < 10; ++i) b.next_u64();
  Rng ca = a.split(3), cb = b.split(3);
  EXPECT_EQ(ca.next_u64(), cb.next_u64());
  EXPECT_NE(a.split(3).next_u64(), a.split(4).next_u64());
}

TEST(Rng, UniformIndexCoversRange) {
  Rng rng(1);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 7000; ++i) ++hits[rng.uniform_index(7)];
  for (int h : hits) EXPECT_GT(h, 850);
}
