#include "anacp/analytic.hpp"

#include "anacp/error.hpp"
#include "anacp/rng.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace anacp {

Matrix ridge_solve(const Matrix& gram, const Matrix& cross, double lambda) {
  if (gram.rows() != gram.cols()) throw Error(Errc::dimension_mismatch, "Gram matrix must be square");
  if (cross.rows() != gram.rows()) {
    throw Error(Errc::dimension_mismatch, "cross matrix has " + std::to_string(cross.rows()) +
                                              " rows, Gram is " + std::to_string(gram.rows()));
  }
  if (!(lambda >= 0.0)) throw Error(Errc::invalid_argument, "ridge lambda must be >= 0");

  const Index n = gram.rows();
  Matrix system = gram;
  system.diagonal().array() += lambda;

  Eigen::LLT<Matrix> llt(system);
  if (llt.info() == Eigen::Success && (lambda > 0.0 || llt.rcond() > 1e-13)) {
    return llt.solve(cross);
  }

  Eigen::SelfAdjointEigenSolver<Matrix> eig(system);
  if (eig.info() != Eigen::Success) {
    throw Error(Errc::eig_decomposition_failure, "ridge fallback eigendecomposition failed");
  }
  const Vector& values = eig.eigenvalues();
  const double largest = n > 0 ? values.cwiseAbs().maxCoeff() : 0.0;
  const double floor = 1e-13 * std::max(largest, 1.0);
  if (values.minCoeff() <= floor) {
    if (lambda == 0.0) throw Error(Errc::singular_system, "Gram matrix is rank-deficient and lambda = 0");
  }
  // Only rounding noise can push eigenvalues of G + lambda I (lambda > 0) below lambda.
  const Vector clamped = values.cwiseMax(std::max(lambda, floor));
  const Matrix& q = eig.eigenvectors();
  return q * (clamped.cwiseInverse().asDiagonal() * (q.transpose() * cross));
}

GramAccumulator::GramAccumulator(Index dim, double lambda)
    : gram_(Matrix::Zero(dim, dim)), cross_(dim, 0), lambda_(lambda) {
  if (dim <= 0) throw Error(Errc::invalid_argument, "accumulator dimension must be positive");
  if (!(lambda >= 0.0)) throw Error(Errc::invalid_argument, "ridge lambda must be >= 0");
}

void GramAccumulator::pad_targets(Index width) {
  if (width < cross_.cols()) {
    throw Error(Errc::shrinking_targets, "target width " + std::to_string(width) + " < current " +
                                             std::to_string(cross_.cols()));
  }
  const Index old = cross_.cols();
  cross_.conservativeResize(Eigen::NoChange, width);
  cross_.rightCols(width - old).setZero();
}

void GramAccumulator::accumulate(const Matrix& Z, const Matrix& targets) {
  if (Z.cols() != dim()) {
    throw Error(Errc::dimension_mismatch, "expected " + std::to_string(dim()) + " columns, got " +
                                              std::to_string(Z.cols()));
  }
  if (targets.rows() != Z.rows()) throw Error(Errc::dimension_mismatch, "Z and T row counts differ");
  pad_targets(targets.cols());
  gram_.selfadjointView<Eigen::Lower>().rankUpdate(Z.transpose());
  gram_.triangularView<Eigen::StrictlyUpper>() = gram_.transpose();
  cross_.noalias() += Z.transpose() * targets;
}

GramAccumulator GramAccumulator::from_parts(Matrix gram, Matrix cross, double lambda) {
  if (gram.rows() != gram.cols() || cross.rows() != gram.rows()) {
    throw Error(Errc::dimension_mismatch, "inconsistent accumulator parts");
  }
  GramAccumulator acc;
  acc.gram_ = std::move(gram);
  acc.cross_ = std::move(cross);
  acc.lambda_ = lambda;
  return acc;
}

RPMatrix random_projection(Index in_dim, Index out_dim, std::uint64_t seed) {
  if (in_dim < 1 || out_dim < 1) throw Error(Errc::invalid_argument, "projection dimensions must be >= 1");
  RPMatrix rp;
  rp.seed = seed;
  rp.weights.resize(in_dim, out_dim);
  Rng rng(seed);
  // Row-major fill order, independent of Eigen's storage order.
  for (Index i = 0; i < in_dim; ++i)
    for (Index j = 0; j < out_dim; ++j) rp.weights(i, j) = rng.normal();
  return rp;
}

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * (0.5 * std::numbers::sqrt2))); }

Matrix project(const RPMatrix& rp, const Matrix& X) {
  if (X.cols() != rp.in_dim()) {
    throw Error(Errc::dimension_mismatch, "projection expects " + std::to_string(rp.in_dim()) +
                                              " input features, got " + std::to_string(X.cols()));
  }
  Matrix Z = X * rp.weights;
  Z = Z.unaryExpr([](double v) { return gelu(v); });
  return Z;
}

Matrix one_hot(const std::vector<Index>& slots, Index width) {
  Matrix out = Matrix::Zero(static_cast<Index>(slots.size()), width);
  for (std::size_t i = 0; i < slots.size(); ++i) out(static_cast<Index>(i), slots[i]) = 1.0;
  return out;
}

}  // namespace anacp
