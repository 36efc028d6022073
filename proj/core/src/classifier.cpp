#include "anacp/classifier.hpp"

#include "anacp/error.hpp"

#include <algorithm>
#include <limits>
#include <string>
#include <unordered_map>

namespace anacp {

std::vector<ClassId> argmax_labels(const Matrix& scores, std::span<const ClassId> class_ids,
                                   std::span<const ClassId> allowed) {
  if (scores.cols() != static_cast<Index>(class_ids.size())) {
    throw Error(Errc::dimension_mismatch, "score columns do not match class ids");
  }
  std::vector<Index> candidates;
  for (std::size_t k = 0; k < class_ids.size(); ++k) {
    if (allowed.empty() || std::find(allowed.begin(), allowed.end(), class_ids[k]) != allowed.end()) {
      candidates.push_back(static_cast<Index>(k));
    }
  }
  if (candidates.empty()) throw Error(Errc::unknown_class, "no admissible class to predict");

  std::vector<ClassId> out(static_cast<std::size_t>(scores.rows()));
  for (Index r = 0; r < scores.rows(); ++r) {
    Index best = candidates.front();
    for (Index k : candidates) {
      const double s = scores(r, k);
      const double b = scores(r, best);
      if (s > b || (s == b && class_ids[static_cast<std::size_t>(k)] < class_ids[static_cast<std::size_t>(best)])) {
        best = k;
      }
    }
    out[static_cast<std::size_t>(r)] = class_ids[static_cast<std::size_t>(best)];
  }
  return out;
}

std::vector<ClassId> ncm_classify(const Matrix& U, const TargetPrototypes& prototypes, NcmMetric metric,
                                  std::span<const ClassId> allowed) {
  if (prototypes.size() == 0) throw Error(Errc::not_fitted, "no prototypes to classify against");
  if (U.cols() != prototypes.prototypes.cols()) {
    throw Error(Errc::dimension_mismatch, "inputs and prototypes differ in dimension");
  }
  const Matrix& P = prototypes.prototypes;
  Matrix scores;
  if (metric == NcmMetric::euclidean) {
    scores.resize(U.rows(), P.rows());
    for (Index k = 0; k < P.rows(); ++k) {
      scores.col(k) = -(U.rowwise() - P.row(k)).rowwise().squaredNorm();
    }
  } else {
    const Vector inv_p = P.rowwise().norm().cwiseMax(1e-300).cwiseInverse();
    scores = U * (inv_p.asDiagonal() * P).transpose();
  }
  return argmax_labels(scores, prototypes.class_ids, allowed);
}

ReplaySampler::ReplaySampler(const ClassStats& stats, double eps_scale, int per_class, std::uint64_t seed)
    : stats_(&stats), per_class_(per_class), rng_(seed) {
  if (per_class < 0) throw Error(Errc::invalid_argument, "replay count must be >= 0");
  if (stats.total_count() == 0) throw Error(Errc::not_fitted, "no statistics to sample from");
  const Matrix cov = stats.shared_cov();
  const double eps = shrinkage_eps(cov, eps_scale);
  const Matrix regularised = cov + eps * Matrix::Identity(cov.rows(), cov.cols());
  Eigen::LLT<Matrix> llt(regularised);
  if (llt.info() == Eigen::Success) {
    factor_ = llt.matrixL();
  } else {
    // Sigma + eps I is only PSD (e.g. Sigma = 0): use the symmetric square root instead.
    Eigen::SelfAdjointEigenSolver<Matrix> eig(regularised);
    if (eig.info() != Eigen::Success) throw Error(Errc::eig_decomposition_failure, "replay covariance");
    factor_ = eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  }
}

std::pair<Matrix, std::vector<ClassId>> ReplaySampler::sample(std::span<const ClassId> classes) {
  const Index d = stats_->dim();
  for (ClassId id : classes) {
    if (!stats_->has_class(id)) throw Error(Errc::unknown_class, "no mean stored for class " + std::to_string(id));
  }
  const auto total = static_cast<Index>(classes.size()) * per_class_;
  Matrix samples(total, d);
  std::vector<ClassId> labels;
  labels.reserve(static_cast<std::size_t>(total));
  Vector z(d);
  Index row = 0;
  for (ClassId id : classes) {
    const Vector mu = stats_->mean(id);
    for (int k = 0; k < per_class_; ++k, ++row) {
      for (Index i = 0; i < d; ++i) z(i) = rng_.normal();
      samples.row(row) = (mu + factor_ * z).transpose();
      labels.push_back(id);
    }
  }
  return {std::move(samples), std::move(labels)};
}

ElmClassifier::ElmClassifier(Index input_dim, Index rp_dim, double lambda, std::uint64_t seed)
    : rp_(random_projection(input_dim, rp_dim, seed)), lambda_(lambda) {
  if (!(lambda >= 0.0)) throw Error(Errc::invalid_argument, "classifier lambda must be >= 0");
}

void ElmClassifier::fit(const Matrix& U, std::span<const ClassId> labels) {
  if (static_cast<std::size_t>(U.rows()) != labels.size()) {
    throw Error(Errc::dimension_mismatch, "row count and label count differ");
  }
  std::unordered_map<ClassId, Index> slots;
  std::vector<ClassId> ids;
  std::vector<Index> row_slots(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = slots.try_emplace(labels[i], static_cast<Index>(ids.size()));
    if (inserted) ids.push_back(labels[i]);
    row_slots[i] = it->second;
  }
  GramAccumulator acc(rp_.out_dim(), lambda_);
  acc.accumulate(project(rp_, U), one_hot(row_slots, static_cast<Index>(ids.size())));
  weights_ = acc.solve();
  class_ids_ = std::move(ids);
}

Matrix ElmClassifier::scores(const Matrix& U) const {
  if (!fitted()) throw Error(Errc::not_fitted, "ELM classifier has not been fitted");
  return project(rp_, U) * weights_;
}

std::vector<ClassId> ElmClassifier::classify(const Matrix& U, std::span<const ClassId> allowed) const {
  if (!fitted()) throw Error(Errc::not_fitted, "ELM classifier has not been fitted");
  if (U.rows() == 0) return {};
  return argmax_labels(scores(U), class_ids_, allowed);
}

ElmClassifier ElmClassifier::from_parts(Index input_dim, Index rp_dim, double lambda, std::uint64_t seed,
                                        std::vector<ClassId> class_ids, Matrix weights) {
  ElmClassifier elm(input_dim, rp_dim, lambda, seed);
  if (weights.rows() != rp_dim || weights.cols() != static_cast<Index>(class_ids.size())) {
    throw Error(Errc::dimension_mismatch, "checkpoint classifier weights have the wrong shape");
  }
  elm.weights_ = std::move(weights);
  elm.class_ids_ = std::move(class_ids);
  return elm;
}

ElmClassifier rebuild_elm(const CPLayer& cp, const ClassStats& stats, int per_class, double lambda,
                          Index rp_dim, std::uint64_t rp_seed, std::uint64_t sample_seed, double eps_scale) {
  if (!cp.fitted()) throw Error(Errc::not_fitted, "CP layer must be fitted before the classifier");
  ReplaySampler sampler(stats, eps_scale, per_class, sample_seed);
  auto [generated, labels] = sampler.sample(stats.class_ids());
  ElmClassifier elm(stats.dim(), rp_dim, lambda, rp_seed);
  if (generated.rows() == 0) throw Error(Errc::invalid_argument, "replay produced no samples (R = 0)");
  elm.fit(cp.transform(generated), labels);
  return elm;
}

}  // namespace anacp
