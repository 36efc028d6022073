#pragma once

#include "anacp/analytic.hpp"
#include "anacp/repulsion.hpp"
#include "anacp/stats.hpp"
#include "anacp/types.hpp"

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

namespace anacp {

struct CPConfig {
  Index rp_dim = 5000;
  int heads = 3;
  double lambda = kDefaultLambda;
  double alpha = kDefaultAlpha;
  double eps_scale = kDefaultEpsScale;
  bool use_repulsion = true;
  std::uint64_t base_seed = 0;  // head h uses base_seed + h

  void validate() const;
};

/// One random projection plus the sufficient statistics of its regression.
struct CPHead {
  RPMatrix rp;        // d x D
  Matrix gram;        // D x D, sum of Z^T Z
  Matrix proto_sums;  // D x C, column k = sum of Z rows of class_ids[k]
  Matrix weights;     // D x d
};

/// Contrastive projection layer.
///
/// Each head regresses its random features onto the shared target prototypes
/// P~. The cross matrix is never accumulated directly: it is rebuilt as
/// proto_sums * P~ (random-space class sums times targets) every time the
/// prototypes change, and the weights are re-solved from (gram, cross).
class CPLayer {
 public:
  CPLayer() = default;
  CPLayer(Index input_dim, CPConfig config);

  /// `stats` must already include this batch. Adds the batch to every head's
  /// gram and class sums, recomputes the prototypes over all seen classes and
  /// re-solves every head.
  void update(const Matrix& X, std::span<const ClassId> labels, const ClassStats& stats);

  /// Mean over heads of GELU(X R_h) W_h; output is n x d.
  Matrix transform(const Matrix& X) const;

  /// Rebuilds prototypes and weights from the stored sums and `stats`.
  void refit(const ClassStats& stats);

  bool fitted() const { return fitted_; }
  Index input_dim() const { return input_dim_; }
  const CPConfig& config() const { return config_; }
  const std::vector<CPHead>& heads() const { return heads_; }
  const std::vector<ClassId>& class_ids() const { return class_ids_; }
  const TargetPrototypes& prototypes() const { return prototypes_; }

  /// Cross matrix of head h for the current prototypes (D x d).
  Matrix cross_matrix(std::size_t head) const;

  /// Checkpoint restore: heads carry their seed, gram, sums and weights;
  /// projections are regenerated from the seeds.
  static CPLayer from_parts(Index input_dim, CPConfig config, std::vector<ClassId> class_ids,
                            std::vector<CPHead> heads, const ClassStats& stats);

 private:
  Matrix aligned_targets() const;
  void rebuild_prototypes(const ClassStats& stats);

  Index input_dim_ = 0;
  CPConfig config_;
  std::vector<CPHead> heads_;
  std::vector<ClassId> class_ids_;
  std::unordered_map<ClassId, Index> slots_;
  TargetPrototypes prototypes_;
  bool fitted_ = false;
};

}  // namespace anacp
