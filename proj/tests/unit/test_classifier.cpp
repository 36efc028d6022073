#include "helpers.hpp"

#include <gtest/gtest.h>

using namespace anacp;
using anacp::test::gaussian;
using anacp::test::rel_diff;

namespace {

TargetPrototypes protos(const Matrix& rows, std::vector<ClassId> ids) {
  TargetPrototypes p;
  p.prototypes = rows;
  p.class_ids = std::move(ids);
  return p;
}

double accuracy(const std::vector<ClassId>& pred, const std::vector<ClassId>& truth) {
  return accuracy_percent(pred, truth);
}

}  // namespace

TEST(Argmax, TiesGoToLowestClassId) {
  const Matrix scores = Matrix::Zero(3, 4);
  const std::vector<ClassId> ids{5, 2, 9, 7};
  for (ClassId c : argmax_labels(scores, ids)) EXPECT_EQ(c, 2u);
  const std::vector<ClassId> zero_first{0, 1, 2};
  for (ClassId c : argmax_labels(Matrix::Zero(2, 3), zero_first)) EXPECT_EQ(c, 0u);
}

TEST(Argmax, AllowedMask) {
  Matrix s(1, 3);
  s << 3.0, 2.0, 1.0;
  const std::vector<ClassId> ids{0, 1, 2};
  EXPECT_EQ(argmax_labels(s, ids)[0], 0u);
  const std::vector<ClassId> allowed{1, 2};
  EXPECT_EQ(argmax_labels(s, ids, allowed)[0], 1u);
}

TEST(Argmax, PositiveRescalingInvariance) {
  const Matrix s = gaussian(50, 6, 1);
  const std::vector<ClassId> ids{0, 1, 2, 3, 4, 5};
  EXPECT_EQ(argmax_labels(s, ids), argmax_labels(s * 3.7, ids));
}

TEST(Ncm, ExactPrototypeAndTies) {
  Matrix P = Matrix::Zero(6, 2);
  for (Index c = 0; c < 6; ++c) P(c, 0) = static_cast<double>(c);
  const TargetPrototypes p = protos(P, {0, 1, 2, 3, 4, 5});
  Matrix U(2, 2);
  U << 4.0, 0.0,  // exactly prototype 4
      3.5, 0.0;   // equidistant to 3 and 4
  const auto labels = ncm_classify(U, p);
  EXPECT_EQ(labels[0], 4u);
  EXPECT_EQ(labels[1], 3u);
  Matrix Pt = Matrix::Zero(6, 2);
  Pt(2, 0) = 1.0;
  Pt(5, 0) = -1.0;
  Pt(0, 0) = 10.0;
  Pt(1, 0) = 10.0;
  Pt(3, 0) = 10.0;
  Pt(4, 0) = 10.0;
  const auto tie = ncm_classify(Matrix::Zero(1, 2), protos(Pt, {0, 1, 2, 3, 4, 5}));
  EXPECT_EQ(tie[0], 2u);
}

TEST(Ncm, CosineMetric) {
  Matrix P(2, 2);
  P << 10.0, 0.0, 0.0, 1.0;
  Matrix U(1, 2);
  U << 0.1, 0.2;
  EXPECT_EQ(ncm_classify(U, protos(P, {0, 1}), NcmMetric::euclidean)[0], 1u);
  EXPECT_EQ(ncm_classify(U, protos(P, {0, 1}), NcmMetric::cosine)[0], 1u);
  U << 1.0, 0.9;
  EXPECT_EQ(ncm_classify(U, protos(P, {0, 1}), NcmMetric::euclidean)[0], 1u);
  EXPECT_EQ(ncm_classify(U, protos(P, {0, 1}), NcmMetric::cosine)[0], 0u);
}

TEST(Ncm, SeparatedFixture) {
  SynthSpec spec;
  spec.mean_scale = 40.0;
  const SynthData data = generate_synthetic(spec);
  ClassStats stats(spec.dim);
  stats.update(data.train.as_double(), data.train.labels);
  const auto pred = ncm_classify(data.test.as_double(), mean_prototypes(stats));
  EXPECT_GE(accuracy(pred, data.test.labels), 99.0);
}

TEST(Replay, ZeroCountIsEmpty) {
  ClassStats stats(3);
  stats.update(gaussian(10, 3, 1), std::vector<ClassId>(10, 0));
  ReplaySampler s(stats, 1e-4, 0, 1);
  const auto [X, y] = s.sample(std::vector<ClassId>{0});
  EXPECT_EQ(X.rows(), 0);
  EXPECT_TRUE(y.empty());
}

TEST(Replay, ZeroCovarianceCollapsesToMean) {
  Matrix X = Matrix::Ones(4, 3);
  X.bottomRows(2) *= 5.0;
  ClassStats stats(3);
  stats.update(X, std::vector<ClassId>{0, 0, 1, 1});
  ReplaySampler s(stats, 1e-4, 50, 2);
  const auto [Z, y] = s.sample(std::vector<ClassId>{0, 1});
  ASSERT_EQ(Z.rows(), 100);
  for (Index i = 0; i < 100; ++i) {
    const Vector mu = stats.mean(y[static_cast<std::size_t>(i)]);
    EXPECT_LT((Z.row(i).transpose() - mu).norm(), 1e-6);
  }
}

TEST(Replay, MonteCarloMoments) {
  const Index d = 4;
  const Matrix S = anacp::test::random_spd(d, 5);
  const Matrix mu = gaussian(d, 2, 6) * 3.0;
  const ClassStats stats = ClassStats::from_parts(d, {0, 1}, mu, {1000, 1000}, 2000.0 * S);
  ReplaySampler sampler(stats, 0.0, 10000, 7);
  const auto [Z, y] = sampler.sample(std::vector<ClassId>{0, 1});
  for (Index c = 0; c < 2; ++c) {
    const Matrix Zc = Z.middleRows(c * 10000, 10000);
    const Vector m = Zc.colwise().mean().transpose();
    EXPECT_LT((m - mu.col(c)).cwiseAbs().maxCoeff(), 0.05);
    const Matrix centred = Zc.rowwise() - m.transpose();
    const Matrix cov = centred.transpose() * centred / 10000.0;
    for (Index i = 0; i < d; ++i)
      for (Index j = 0; j < d; ++j) EXPECT_NEAR(cov(i, j), S(i, j), 0.1 * std::sqrt(S(i, i) * S(j, j)));
  }
}

TEST(Replay, DeterministicAndUnknownClass) {
  ClassStats stats(3);
  stats.update(gaussian(20, 3, 1), std::vector<ClassId>(20, 4));
  ReplaySampler a(stats, 1e-4, 5, 9);
  ReplaySampler b(stats, 1e-4, 5, 9);
  const std::vector<ClassId> four{4};
  EXPECT_EQ(a.sample(four).first, b.sample(four).first);
  const std::vector<ClassId> five{5};
  EXPECT_ANACP_ERROR(a.sample(five), Errc::unknown_class);
}

TEST(Elm, EmptyInputAndNotFitted) {
  ElmClassifier elm(3, 20, 1.0, 1);
  EXPECT_ANACP_ERROR(elm.classify(gaussian(2, 3, 1)), Errc::not_fitted);
  elm.fit(gaussian(10, 3, 2), std::vector<ClassId>{0, 1, 0, 1, 0, 1, 0, 1, 0, 1});
  EXPECT_TRUE(elm.classify(Matrix(0, 3)).empty());
}

TEST(Elm, SeparableTrainingSetIsFit) {
  Matrix U(40, 2);
  std::vector<ClassId> y;
  const Matrix noise = gaussian(40, 2, 3) * 0.1;
  for (Index i = 0; i < 40; ++i) {
    const bool a = i < 20;
    U.row(i) << (a ? 3.0 : -3.0), 1.0;
    y.push_back(a ? 3 : 8);
  }
  U += noise;
  ElmClassifier elm(2, 50, 1.0, 4);
  elm.fit(U, y);
  EXPECT_EQ(accuracy(elm.classify(U), y), 100.0);
}

TEST(Elm, ZeroWeightsPredictLowestClass) {
  const ElmClassifier elm = ElmClassifier::from_parts(2, 5, 1.0, 1, {4, 1, 7}, Matrix::Zero(5, 3));
  for (ClassId c : elm.classify(gaussian(6, 2, 1))) EXPECT_EQ(c, 1u);
}

TEST(Elm, IndistinguishableClassesAreCoinFlips) {
  SynthSpec spec;
  spec.num_classes = 2;
  spec.mean_scale = 0.0;
  spec.train_per_class = 500;
  spec.test_per_class = 1000;
  const SynthData data = generate_synthetic(spec);
  ElmClassifier elm(spec.dim, 200, 100.0, 5);
  elm.fit(data.train.as_double(), data.train.labels);
  EXPECT_NEAR(accuracy(elm.classify(data.test.as_double()), data.test.labels), 50.0, 5.0);
}

TEST(Elm, ReplayTrainingMatchesRealTraining) {
  // single task on the Gaussian benchmark: ELM on replayed features vs on the real ones
  const SynthData data = generate_synthetic(SynthSpec{});
  const Matrix X = data.train.as_double();
  ClassStats stats(64);
  stats.update(X, data.train.labels);
  CPConfig c;
  c.rp_dim = 300;
  c.heads = 1;
  CPLayer cp(64, c);
  cp.update(X, data.train.labels, stats);
  const Matrix test_u = cp.transform(data.test.as_double());

  ElmClassifier real(64, 300, 100.0, kClassifierSeedOffset);
  real.fit(cp.transform(X), data.train.labels);
  const ElmClassifier replay = rebuild_elm(cp, stats, kDefaultReplayPerClass, 100.0, 300, kClassifierSeedOffset,
                                           kReplaySeedOffset);
  const double a_real = accuracy(real.classify(test_u), data.test.labels);
  const double a_replay = accuracy(replay.classify(test_u), data.test.labels);
  EXPECT_LE(std::abs(a_real - a_replay), 2.0) << a_real << " vs " << a_replay;
}

TEST(Elm, ReplayRowCount) {
  const SynthData data = generate_synthetic(SynthSpec{});
  ClassStats stats(64);
  stats.update(data.train.as_double(), data.train.labels);
  ReplaySampler s(stats, 1e-4, kDefaultReplayPerClass, 1);
  EXPECT_EQ(s.sample(stats.class_ids()).first.rows(), 100 * 20);
}

TEST(Elm, ReplayRebuildIsBitwiseDeterministic) {
  const SynthData data = generate_synthetic(SynthSpec{});
  const Matrix X = data.train.as_double();
  ClassStats stats(64);
  stats.update(X, data.train.labels);
  CPConfig c;
  c.rp_dim = 100;
  c.heads = 2;
  CPLayer cp(64, c);
  cp.update(X, data.train.labels, stats);
  const ElmClassifier a = rebuild_elm(cp, stats, 20, 100.0, 100, 1, 2);
  const ElmClassifier b = rebuild_elm(cp, stats, 20, 100.0, 100, 1, 2);
  EXPECT_EQ(a.weights(), b.weights());
}
