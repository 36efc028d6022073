#pragma once

#include "anacp/analytic.hpp"
#include "anacp/rng.hpp"
#include "anacp/cp_layer.hpp"
#include "anacp/repulsion.hpp"
#include "anacp/stats.hpp"
#include "anacp/types.hpp"

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace anacp {

inline constexpr int kDefaultReplayPerClass = 100;
inline constexpr std::uint64_t kClassifierSeedOffset = 1'000'000;
inline constexpr std::uint64_t kReplaySeedOffset = 2'000'000;

/// Row-wise argmax over `scores` (n x C), column k labelled class_ids[k].
/// Only columns whose class is in `allowed` compete (empty = all). Exact ties
/// go to the lowest class id.
std::vector<ClassId> argmax_labels(const Matrix& scores, std::span<const ClassId> class_ids,
                                   std::span<const ClassId> allowed = {});

enum class NcmMetric { euclidean, cosine };

/// Nearest target prototype for each row of U.
std::vector<ClassId> ncm_classify(const Matrix& U, const TargetPrototypes& prototypes,
                                  NcmMetric metric = NcmMetric::euclidean,
                                  std::span<const ClassId> allowed = {});

/// Draws Gaussian pseudo-samples x = mu_c + L z from the class means and the
/// shared covariance, L the Cholesky factor of Sigma + eps I.
class ReplaySampler {
 public:
  ReplaySampler(const ClassStats& stats, double eps_scale, int per_class, std::uint64_t seed);

  /// per_class rows for every class in `classes`, in that order.
  std::pair<Matrix, std::vector<ClassId>> sample(std::span<const ClassId> classes);

  const Matrix& factor() const { return factor_; }
  int per_class() const { return per_class_; }

 private:
  const ClassStats* stats_;
  Matrix factor_;
  int per_class_;
  Rng rng_;
};

/// Ridge classifier on random features with one-hot targets.
class ElmClassifier {
 public:
  ElmClassifier() = default;
  ElmClassifier(Index input_dim, Index rp_dim, double lambda, std::uint64_t seed);

  /// Fits from scratch: Z = GELU(U R), W = (Z^T Z + lambda I)^{-1} Z^T Y.
  void fit(const Matrix& U, std::span<const ClassId> labels);

  Matrix scores(const Matrix& U) const;
  std::vector<ClassId> classify(const Matrix& U, std::span<const ClassId> allowed = {}) const;

  bool fitted() const { return weights_.cols() > 0; }
  const RPMatrix& rp() const { return rp_; }
  const Matrix& weights() const { return weights_; }
  const std::vector<ClassId>& class_ids() const { return class_ids_; }
  double lambda() const { return lambda_; }

  static ElmClassifier from_parts(Index input_dim, Index rp_dim, double lambda, std::uint64_t seed,
                                  std::vector<ClassId> class_ids, Matrix weights);

 private:
  RPMatrix rp_;
  Matrix weights_;
  std::vector<ClassId> class_ids_;
  double lambda_ = kDefaultLambda;
};

/// Samples `per_class` pseudo-features for every class in `stats`, maps them
/// through the CP layer and fits a fresh ELM on the result.
ElmClassifier rebuild_elm(const CPLayer& cp, const ClassStats& stats, int per_class, double lambda,
                          Index rp_dim, std::uint64_t rp_seed, std::uint64_t sample_seed,
                          double eps_scale = kDefaultEpsScale);

}  // namespace anacp
