#include "helpers.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace anacp;
using anacp::test::gaussian;
using anacp::test::rel_diff;

TEST(RidgeSolve, ZeroTarget) {
  for (double lambda : {0.0, 0.5, 100.0}) {
    const Matrix W = ridge_solve(Matrix::Identity(4, 4), Matrix::Zero(4, 3), lambda);
    EXPECT_EQ(W.norm(), 0.0);
  }
}

TEST(RidgeSolve, IdentityCase) {
  const Matrix W = ridge_solve(Matrix::Identity(5, 5), Matrix::Identity(5, 5), 0.0);
  EXPECT_LT((W - Matrix::Identity(5, 5)).norm(), 1e-14);
}

TEST(RidgeSolve, TwoByTwoAgainstOracles) {
  Matrix X(2, 2);
  X << 1, 0, 1, 1;
  Matrix Y(2, 1);
  Y << 1, 0;
  const Matrix W = ridge_solve(X.transpose() * X, X.transpose() * Y, 0.1);
  // dense normal equations, solved by hand-rolled 2x2 inverse
  Matrix A = X.transpose() * X + 0.1 * Matrix::Identity(2, 2);
  const double det = A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0);
  Matrix Ainv(2, 2);
  Ainv << A(1, 1), -A(0, 1), -A(1, 0), A(0, 0);
  const Matrix dense = Ainv / det * (X.transpose() * Y);
  EXPECT_LT((W - dense).norm(), 1e-6);
  EXPECT_LT((W - oracle::gd_ridge(X, Y, 0.1, 20000)).norm(), 1e-6);
}

TEST(RidgeSolve, GradientVanishesOnRandomInstances) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Matrix X = gaussian(60, 12, seed);
    const Matrix Y = gaussian(60, 3, seed + 50);
    for (double lambda : {0.1, 100.0}) {
      const Matrix W = ridge_solve(X.transpose() * X, X.transpose() * Y, lambda);
      EXPECT_LE(oracle::ridge_gradient(X, Y, W, lambda).norm(), 1e-6 * (X.transpose() * Y).norm());
      EXPECT_LT(rel_diff(W, oracle::augmented_ridge(X, Y, lambda)), 1e-9);
    }
  }
}

TEST(RidgeSolve, ShrinksMonotonically) {
  const Matrix X = gaussian(30, 8, 4);
  const Matrix Y = gaussian(30, 2, 5);
  const Matrix G = X.transpose() * X;
  const Matrix H = X.transpose() * Y;
  double prev = std::numeric_limits<double>::infinity();
  for (double lambda : {0.0, 0.01, 1.0, 10.0, 1e3, 1e6}) {
    const double n = ridge_solve(G, H, lambda).norm();
    EXPECT_LE(n, prev * (1 + 1e-12));
    prev = n;
  }
}

TEST(RidgeSolve, SingularWithoutRegularisation) {
  const Matrix X = gaussian(3, 6, 1);  // rank 3 Gram in 6 dimensions
  EXPECT_ANACP_ERROR(ridge_solve(X.transpose() * X, Matrix::Ones(6, 1), 0.0), Errc::singular_system);
  EXPECT_NO_THROW(ridge_solve(X.transpose() * X, Matrix::Ones(6, 1), 1e-3));
}

TEST(RidgeSolve, ShapeChecks) {
  EXPECT_ANACP_ERROR(ridge_solve(Matrix::Identity(3, 3), Matrix::Ones(4, 1), 1.0), Errc::dimension_mismatch);
  EXPECT_ANACP_ERROR(ridge_solve(Matrix::Ones(3, 2), Matrix::Ones(3, 1), 1.0), Errc::dimension_mismatch);
}

TEST(GramAccumulator, BaseCase) {
  const Matrix Z = gaussian(10, 4, 1);
  const Matrix T = gaussian(10, 2, 2);
  GramAccumulator acc(4, 1.0);
  acc.accumulate(Z, T);
  EXPECT_LT((acc.gram() - Z.transpose() * Z).norm(), 1e-12);
  EXPECT_LT((acc.cross() - Z.transpose() * T).norm(), 1e-12);
}

TEST(GramAccumulator, ZeroPaddingKeepsOldColumns) {
  GramAccumulator acc(3, 1.0);
  acc.accumulate(gaussian(5, 3, 1), gaussian(5, 2, 2));
  const Matrix before = acc.cross();
  acc.pad_targets(3);
  EXPECT_EQ(acc.width(), 3);
  EXPECT_EQ(acc.cross().leftCols(2), before);
  EXPECT_EQ(acc.cross().col(2).norm(), 0.0);
  EXPECT_ANACP_ERROR(acc.pad_targets(2), Errc::shrinking_targets);
  EXPECT_ANACP_ERROR(acc.accumulate(gaussian(2, 3, 3), gaussian(2, 1, 4)), Errc::shrinking_targets);
}

TEST(GramAccumulator, ChunkingIsExact) {
  const Matrix Z = gaussian(100, 6, 3);
  const Matrix T = gaussian(100, 4, 4);
  GramAccumulator once(6, 2.0);
  once.accumulate(Z, T);
  GramAccumulator chunks(6, 2.0);
  chunks.accumulate(Z.bottomRows(70), T.bottomRows(70));
  chunks.accumulate(Z.topRows(30), T.topRows(30));
  EXPECT_LT(rel_diff(once.gram(), chunks.gram()), 1e-10);
  EXPECT_LT(rel_diff(once.cross(), chunks.cross()), 1e-10);
  EXPECT_LT(rel_diff(once.solve(), chunks.solve()), 1e-10);
}

TEST(GramAccumulator, NoForgettingAcrossGrowingTasks) {
  // three tasks introducing new target columns; the accumulated solve must equal
  // the joint solve on the pooled data with the final width.
  const Index d = 8;
  std::vector<Matrix> Zs{gaussian(20, d, 1), gaussian(25, d, 2), gaussian(30, d, 3)};
  const std::vector<Index> widths{2, 4, 5};
  std::vector<Matrix> Ts;
  for (std::size_t t = 0; t < 3; ++t) Ts.push_back(gaussian(Zs[t].rows(), widths[t], 10 + t));
  GramAccumulator acc(d, 0.5);
  for (std::size_t t = 0; t < 3; ++t) acc.accumulate(Zs[t], Ts[t]);
  Matrix Z(75, d);
  Z << Zs[0], Zs[1], Zs[2];
  Matrix T = Matrix::Zero(75, 5);
  T.block(0, 0, 20, 2) = Ts[0];
  T.block(20, 0, 25, 4) = Ts[1];
  T.block(45, 0, 30, 5) = Ts[2];
  EXPECT_LT(rel_diff(acc.solve(), oracle::augmented_ridge(Z, T, 0.5)), 1e-8);
}

TEST(RandomProjection, DeterministicAndShaped) {
  const RPMatrix a = random_projection(768, 5000, 7);
  EXPECT_EQ(a.in_dim(), 768);
  EXPECT_EQ(a.out_dim(), 5000);
  const RPMatrix b = random_projection(768, 5000, 7);
  EXPECT_EQ(a.weights, b.weights);
  const RPMatrix c = random_projection(768, 5000, 8);
  EXPECT_NE(a.weights, c.weights);
}

TEST(RandomProjection, StandardNormalEntries) {
  const RPMatrix r = random_projection(1000, 1000, 3);
  const double n = static_cast<double>(r.weights.size());
  const double mean = r.weights.sum() / n;
  const double var = (r.weights.array() - mean).square().sum() / n;
  EXPECT_NEAR(mean, 0.0, 0.01);
  EXPECT_NEAR(var, 1.0, 0.01);
}

TEST(Gelu, KnownValues) {
  EXPECT_EQ(gelu(0.0), 0.0);
  EXPECT_NEAR(gelu(1.0), 0.8413447, 1e-6);
  EXPECT_NEAR(gelu(10.0), 10.0, 1e-6);
  EXPECT_NEAR(gelu(-10.0), 0.0, 1e-6);
  EXPECT_NEAR(gelu(-1.0), -1.0 * (1.0 - 0.8413447), 1e-6);
}

TEST(Project, ZeroInputAndShapes) {
  const RPMatrix rp = random_projection(4, 9, 1);
  EXPECT_EQ(project(rp, Matrix::Zero(3, 4)).norm(), 0.0);
  EXPECT_EQ(project(rp, Matrix::Zero(3, 4)).cols(), 9);
  EXPECT_ANACP_ERROR(project(rp, Matrix::Zero(3, 5)), Errc::dimension_mismatch);
}

TEST(Project, RowwiseAndBlockConsistent) {
  const RPMatrix rp = random_projection(64, 300, 2);
  const Matrix X = gaussian(257, 64, 3);
  const Matrix full = project(rp, X);
  const Matrix head = project(rp, X.topRows(100));
  const Matrix tail = project(rp, X.bottomRows(157));
  // blocked products may round differently depending on a row's position
  EXPECT_LT(rel_diff(full.topRows(100), head), 1e-14);
  EXPECT_LT(rel_diff(full.bottomRows(157), tail), 1e-14);
  const Matrix one = project(rp, X.row(42));
  EXPECT_LT(rel_diff(one.row(0), full.row(42)), 1e-14);
}

TEST(OneHot, CrossMatrixIsClassSums) {
  const Matrix Z = gaussian(6, 3, 1);
  const std::vector<Index> slots{0, 2, 1, 0, 2, 2};
  const Matrix Y = one_hot(slots, 3);
  const Matrix H = Z.transpose() * Y;
  for (Index k = 0; k < 3; ++k) {
    Vector sum = Vector::Zero(3);
    for (std::size_t i = 0; i < slots.size(); ++i)
      if (slots[i] == k) sum += Z.row(static_cast<Index>(i)).transpose();
    EXPECT_LT((H.col(k) - sum).norm(), 1e-14);
  }
}
