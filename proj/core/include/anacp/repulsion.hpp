#pragma once

#include "anacp/stats.hpp"
#include "anacp/types.hpp"

#include <array>
#include <vector>

namespace anacp {

inline constexpr double kDefaultAlpha = 1.0;

/// Sum over ordered pairs i != j of |cos(v_i, v_j)|; vectors are the columns.
/// Each unordered pair therefore contributes twice.
double cosine_sum(const Matrix& columns);

/// Directional-derivative numerators g_i for shifting column i of `w` along
/// column i of `e`:
///
///   g_i = sum_{j != i} (1 / |w_j|) [ s_ij <e_i, w_j> |w_i|^2 - <e_i, w_i> |<w_i, w_j>| ]
///
/// where s_ij = +1 if <w_i, w_j> >= 0 and -1 otherwise. The derivative of
/// f_i(a) = sum_{j != i} |cos(w_i + a e_i, w_j)| at a = 0 equals g_i / |w_i|^3.
/// Only the first e.cols() columns of w get a value; the rest of w still enters
/// every sum.
Vector repulsion_slopes(const Matrix& w, const Matrix& e);

/// delta_i = -sign(g_i), or 0 when |g_i| <= 1e-10 |w_i|^2 sum_{j != i} 1/|w_j|.
/// `e` must have orthonormal columns, one per column of `w`.
std::vector<int> delta_signs(const Matrix& w, const Matrix& e);

/// Target prototypes for the contrastive projection layer.
struct TargetPrototypes {
  Matrix prototypes;              // C x d, row k belongs to class_ids[k]
  std::vector<ClassId> class_ids;
  double alpha = 0.0;
  double cos_sum_before = 0.0;    // on the whitened means
  double cos_sum_after = 0.0;     // on the whitened, perturbed means
  std::array<int, 3> delta_histogram{};  // counts of delta = -1, 0, +1

  Index size() const { return prototypes.rows(); }
};

/// Negative repulsion: whiten the class means, take the thin SVD
/// U S V^T, add alpha * diag(delta) to S (negative entries clamped to 0), and
/// map U S~ V^T back through Sigma^{1/2}.
TargetPrototypes separate_prototypes(const ClassStats& stats, const WhitenTransform& whitener,
                                     double alpha);

/// The class means themselves, used when repulsion is switched off.
TargetPrototypes mean_prototypes(const ClassStats& stats);

}  // namespace anacp
