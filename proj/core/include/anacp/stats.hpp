#pragma once

#include "anacp/types.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

namespace anacp {

/// Running class means, counts and the shared within-class covariance.
///
/// Classes are stored in first-seen order; `slot()` maps a class id to its
/// column in `means()`. The covariance is kept as the unnormalised within-class
/// scatter so that updates are exact sums:
///
///   Sigma_t = (N_{t-1} / N_t) Sigma_{t-1} + (1 / N_t) sum_{c in task} sum_{i in c} (x_i - mu_c)(x_i - mu_c)^T
///
/// with 1/N normalisation. If a class shows up again in a later batch, the
/// between-batch term n_a n_b / (n_a + n_b) (mu_a - mu_b)(mu_a - mu_b)^T is added so
/// the result still equals the pooled within-class scatter of all data seen.
class ClassStats {
 public:
  ClassStats() = default;
  explicit ClassStats(Index dim);

  /// X is n x d (one sample per row), labels has n entries.
  void update(const Matrix& X, std::span<const ClassId> labels);

  Index dim() const { return dim_; }
  Index num_classes() const { return static_cast<Index>(class_ids_.size()); }
  std::uint64_t total_count() const { return total_; }

  const std::vector<ClassId>& class_ids() const { return class_ids_; }
  bool has_class(ClassId id) const { return slots_.contains(id); }
  std::optional<Index> slot(ClassId id) const;

  /// d x C_seen, columns in class_ids() order.
  const Matrix& means() const { return means_; }
  Vector mean(ClassId id) const;
  const std::vector<std::uint64_t>& counts() const { return counts_; }
  std::uint64_t count(ClassId id) const;

  const Matrix& scatter() const { return scatter_; }
  Matrix shared_cov() const;

  /// Rebuilds a snapshot from serialized parts (checkpoint loading).
  static ClassStats from_parts(Index dim, std::vector<ClassId> class_ids, Matrix means,
                               std::vector<std::uint64_t> counts, Matrix scatter);

 private:
  Index dim_ = 0;
  std::vector<ClassId> class_ids_;
  std::unordered_map<ClassId, Index> slots_;
  Matrix means_;
  std::vector<std::uint64_t> counts_;
  Matrix scatter_;
  std::uint64_t total_ = 0;
};

/// Symmetric square-root pair for the (regularised) shared covariance.
struct WhitenTransform {
  Matrix forward;   // (Sigma + eps I)^{-1/2}
  Matrix backward;  // (Sigma + eps I)^{1/2}
  double eps = 0.0;

  Matrix whiten(const Matrix& columns) const { return forward * columns; }
  Matrix dewhiten(const Matrix& columns) const { return backward * columns; }
};

inline constexpr double kDefaultEpsScale = 1e-4;

/// eps = eps_scale * trace(Sigma) / d; eigenvalues are clamped below at 1e-12.
WhitenTransform make_whitener(const Matrix& cov, double eps_scale = kDefaultEpsScale);
WhitenTransform make_whitener(const ClassStats& stats, double eps_scale = kDefaultEpsScale);

/// Shrinkage used by both whitening and replay sampling.
double shrinkage_eps(const Matrix& cov, double eps_scale);

}  // namespace anacp
