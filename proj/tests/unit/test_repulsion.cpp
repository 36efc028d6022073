#include "helpers.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace anacp;
using anacp::test::gaussian;
using anacp::test::rel_diff;

namespace {

Matrix cols(std::initializer_list<std::initializer_list<double>> columns) {
  const auto n = static_cast<Index>(columns.size());
  const auto d = static_cast<Index>(columns.begin()->size());
  Matrix m(d, n);
  Index j = 0;
  for (const auto& c : columns) {
    Index i = 0;
    for (double v : c) m(i++, j) = v;
    ++j;
  }
  return m;
}

// Stats with an exact identity covariance and the given class means (d x C).
ClassStats stats_with(const Matrix& means, std::uint64_t per_class = 10) {
  const auto C = static_cast<std::size_t>(means.cols());
  std::vector<ClassId> ids(C);
  for (std::size_t c = 0; c < C; ++c) ids[c] = static_cast<ClassId>(c);
  const double N = static_cast<double>(per_class * C);
  return ClassStats::from_parts(means.rows(), ids, means, std::vector<std::uint64_t>(C, per_class),
                                N * Matrix::Identity(means.rows(), means.rows()));
}

}  // namespace

TEST(CosineSum, HandCases) {
  EXPECT_NEAR(cosine_sum(cols({{1, 0}, {0, 1}})), 0.0, 1e-15);
  EXPECT_NEAR(cosine_sum(cols({{1, 2}, {1, 2}})), 2.0, 1e-15);
  EXPECT_NEAR(cosine_sum(cols({{1, 0}, {M_SQRT1_2, M_SQRT1_2}})), 1.41421356, 1e-8);
  EXPECT_ANACP_ERROR(cosine_sum(cols({{1, 0}, {0, 0}})), Errc::zero_vector);
}

TEST(CosineSum, OrthogonalTransformInvariance) {
  const Matrix w = gaussian(6, 5, 1);
  const Eigen::HouseholderQR<Matrix> qr(gaussian(9, 6, 2));
  const Matrix Q = qr.householderQ() * Matrix::Identity(9, 6);
  EXPECT_NEAR(cosine_sum(Q * w), cosine_sum(w), 1e-10);
}

TEST(DeltaSigns, AlreadyOrthogonal) {
  const Matrix I2 = Matrix::Identity(2, 2);
  EXPECT_EQ(delta_signs(I2, I2), (std::vector<int>{0, 0}));
}

TEST(DeltaSigns, CollinearPairWithOrthogonalShift) {
  const Matrix w = cols({{1, 0}, {-1, 0}});
  const Matrix e = Matrix::Identity(2, 2);
  EXPECT_EQ(delta_signs(w, e), (std::vector<int>{0, 0}));
  EXPECT_NEAR(oracle::fd_slope(w, 0, e.col(0)), 0.0, 1e-9);
  EXPECT_NEAR(oracle::fd_slope(w, 1, e.col(1)), 0.0, 1e-9);
}

TEST(DeltaSigns, MatchFiniteDifferences) {
  const Matrix w = gaussian(5, 5, 0);
  const Eigen::HouseholderQR<Matrix> qr(gaussian(5, 5, 1));
  const Matrix e = qr.householderQ();
  const auto delta = delta_signs(w, e);
  const Vector g = repulsion_slopes(w, e);
  for (Index i = 0; i < 5; ++i) {
    const double fd = oracle::fd_slope(w, i, e.col(i));
    const double analytic = g(i) / std::pow(w.col(i).norm(), 3);
    EXPECT_NEAR(analytic, fd, 1e-6 * std::max(1.0, std::abs(fd)));
    if (std::abs(fd) > 1e-6) EXPECT_EQ(delta[static_cast<std::size_t>(i)], fd > 0 ? -1 : 1) << "i=" << i;
  }
}

TEST(DeltaSigns, RejectsBadBasis) {
  EXPECT_ANACP_ERROR(delta_signs(Matrix::Identity(2, 2), 2.0 * Matrix::Identity(2, 2)),
                     Errc::non_orthonormal_basis);
  EXPECT_ANACP_ERROR(delta_signs(cols({{1, 0}, {0, 0}}), Matrix::Identity(2, 2)), Errc::zero_vector);
}

TEST(DeltaSigns, SmallShiftNeverIncreasesCosineSum) {
  Rng rng(99);
  for (int inst = 0; inst < 30; ++inst) {
    const auto C = static_cast<Index>(2 + rng.below(9));
    const auto d = static_cast<Index>(C + rng.below(static_cast<std::uint64_t>(64 - C + 1)));
    const Matrix means = gaussian(d, C, 1000 + static_cast<std::uint64_t>(inst)).array() + 0.5;
    const Eigen::BDCSVD<Matrix> svd(means, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Matrix Vt = svd.matrixV().transpose();
    const Matrix w = svd.singularValues().asDiagonal() * Vt;
    const auto delta = delta_signs(w, Vt);
    double min_norm = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < C; ++i) min_norm = std::min(min_norm, w.col(i).norm());
    const double alpha = 1e-3 * min_norm;
    Matrix shifted = w;
    for (Index i = 0; i < C; ++i) shifted.col(i) += alpha * delta[static_cast<std::size_t>(i)] * Vt.col(i);
    EXPECT_LE(cosine_sum(shifted), cosine_sum(w) + 1e-12) << "instance " << inst;
  }
}

TEST(SeparatePrototypes, ZeroAlphaReproducesMeans) {
  SynthSpec spec;
  spec.dim = 16;
  spec.num_classes = 6;
  spec.covariance = CovarianceKind::random_spd;
  spec.kappa = 20.0;
  const SynthData data = generate_synthetic(spec);
  ClassStats stats(16);
  stats.update(data.train.as_double(), data.train.labels);
  const TargetPrototypes p = separate_prototypes(stats, make_whitener(stats), 0.0);
  EXPECT_LT(rel_diff(p.prototypes.transpose(), stats.means()), 1e-8);
  EXPECT_EQ(p.class_ids, stats.class_ids());
  EXPECT_NEAR(p.cos_sum_after, p.cos_sum_before, 1e-10);
}

TEST(SeparatePrototypes, OrthogonalMeansAreLeftAlone) {
  Matrix means = Matrix::Zero(5, 3);
  means(0, 0) = 3.0;
  means(1, 1) = 2.0;
  means(4, 2) = 5.0;
  const ClassStats stats = stats_with(means);
  for (double alpha : {0.1, 1.0, 10.0}) {
    const TargetPrototypes p = separate_prototypes(stats, make_whitener(stats), alpha);
    EXPECT_EQ(p.delta_histogram[1], 3);
    EXPECT_LT(rel_diff(p.prototypes.transpose(), means), 1e-8);
  }
}

TEST(SeparatePrototypes, SmallAlphaReducesCosineSum) {
  const Matrix means = gaussian(32, 10, 7).array() + 1.0;
  const ClassStats stats = stats_with(means);
  const TargetPrototypes p = separate_prototypes(stats, make_whitener(stats), 1e-3);
  EXPECT_LE(p.cos_sum_after, p.cos_sum_before);
  EXPECT_EQ(p.delta_histogram[0] + p.delta_histogram[1] + p.delta_histogram[2], 10);
}

TEST(SeparatePrototypes, MoreClassesThanDimensions) {
  const Matrix means = gaussian(3, 7, 8);
  const ClassStats stats = stats_with(means);
  const TargetPrototypes p = separate_prototypes(stats, make_whitener(stats), 0.5);
  EXPECT_EQ(p.size(), 7);
  EXPECT_GE(p.delta_histogram[1], 4);
  EXPECT_TRUE(p.prototypes.allFinite());
}

TEST(SeparatePrototypes, NeedsTwoClasses) {
  const ClassStats stats = stats_with(gaussian(4, 1, 9));
  EXPECT_ANACP_ERROR(separate_prototypes(stats, make_whitener(stats), 1.0), Errc::too_few_classes);
}

TEST(SeparatePrototypes, MeanPrototypesAreTheMeans) {
  const Matrix means = gaussian(4, 3, 10);
  const TargetPrototypes p = mean_prototypes(stats_with(means));
  EXPECT_EQ(p.prototypes, Matrix(means.transpose()));
  EXPECT_EQ(p.alpha, 0.0);
}
