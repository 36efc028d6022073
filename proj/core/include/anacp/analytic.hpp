#pragma once

#include "anacp/types.hpp"

#include <cstdint>

namespace anacp {

inline constexpr double kDefaultLambda = 100.0;

/// W = (G + lambda I)^{-1} H without forming the inverse.
///
/// Cholesky first; if the factorisation fails (G only PSD up to rounding) it
/// falls back to a symmetric eigendecomposition. With lambda == 0 a
/// rank-deficient G raises Errc::singular_system.
Matrix ridge_solve(const Matrix& gram, const Matrix& cross, double lambda);

/// Gram and cross matrices accumulated over data chunks.
class GramAccumulator {
 public:
  GramAccumulator() = default;
  GramAccumulator(Index dim, double lambda);

  /// gram += Z^T Z; cross is zero-padded on the right to T.cols() columns and
  /// then cross += Z^T T. T may not have fewer columns than cross already has.
  void accumulate(const Matrix& Z, const Matrix& targets);

  /// Widens cross to `width` columns without adding data.
  void pad_targets(Index width);

  Matrix solve() const { return ridge_solve(gram_, cross_, lambda_); }

  Index dim() const { return gram_.rows(); }
  Index width() const { return cross_.cols(); }
  double lambda() const { return lambda_; }
  const Matrix& gram() const { return gram_; }
  const Matrix& cross() const { return cross_; }

  static GramAccumulator from_parts(Matrix gram, Matrix cross, double lambda);

 private:
  Matrix gram_;
  Matrix cross_;
  double lambda_ = kDefaultLambda;
};

/// Fixed d x D matrix of i.i.d. standard normal draws, regenerated from `seed`.
struct RPMatrix {
  Matrix weights;
  std::uint64_t seed = 0;

  Index in_dim() const { return weights.rows(); }
  Index out_dim() const { return weights.cols(); }
};

RPMatrix random_projection(Index in_dim, Index out_dim, std::uint64_t seed);

/// Exact GELU: x * Phi(x), Phi the standard normal CDF (erf form).
double gelu(double x);

/// GELU(X R) for X of shape n x d. Each output row depends only on its input row
/// (up to rounding: the blocked product may order sums differently by row position).
Matrix project(const RPMatrix& rp, const Matrix& X);

/// Columns of one-hot targets: row i has a 1 in column slots[i].
Matrix one_hot(const std::vector<Index>& slots, Index width);

}  // namespace anacp
