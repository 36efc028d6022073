#include "anacp/repulsion.hpp"

#include "anacp/error.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace anacp {

namespace {

Vector column_norms(const Matrix& m) { return m.colwise().norm().transpose(); }

void require_nonzero(const Vector& norms) {
  for (Index i = 0; i < norms.size(); ++i) {
    if (!(norms(i) > 0.0)) throw Error(Errc::zero_vector, "vector " + std::to_string(i) + " is zero");
  }
}

}  // namespace

double cosine_sum(const Matrix& columns) {
  const Vector norms = column_norms(columns);
  require_nonzero(norms);
  const Matrix inner = columns.transpose() * columns;
  double total = 0.0;
  for (Index i = 0; i < inner.rows(); ++i) {
    for (Index j = 0; j < inner.cols(); ++j) {
      if (i != j) total += std::abs(inner(i, j)) / (norms(i) * norms(j));
    }
  }
  return total;
}

Vector repulsion_slopes(const Matrix& w, const Matrix& e) {
  if (e.rows() != w.rows() || e.cols() > w.cols()) {
    throw Error(Errc::dimension_mismatch, "basis shape does not match the vectors");
  }
  const Vector norms = column_norms(w);
  require_nonzero(norms);
  const Matrix inner = w.transpose() * w;   // <w_i, w_j>
  const Matrix proj = e.transpose() * w;    // <e_i, w_j>
  Vector g = Vector::Zero(e.cols());
  for (Index i = 0; i < e.cols(); ++i) {
    const double sq_norm = norms(i) * norms(i);
    for (Index j = 0; j < w.cols(); ++j) {
      if (j == i) continue;
      const double sign = inner(i, j) >= 0.0 ? 1.0 : -1.0;
      g(i) += (sign * proj(i, j) * sq_norm - proj(i, i) * std::abs(inner(i, j))) / norms(j);
    }
  }
  return g;
}

namespace {

std::vector<int> signs_from_slopes(const Matrix& w, const Vector& g) {
  const Vector norms = column_norms(w);
  double inv_total = 0.0;
  for (Index j = 0; j < norms.size(); ++j) inv_total += 1.0 / norms(j);
  std::vector<int> delta(static_cast<std::size_t>(g.size()), 0);
  for (Index i = 0; i < g.size(); ++i) {
    const double threshold = 1e-10 * norms(i) * norms(i) * (inv_total - 1.0 / norms(i));
    if (std::abs(g(i)) > threshold) delta[static_cast<std::size_t>(i)] = g(i) < 0.0 ? 1 : -1;
  }
  return delta;
}

}  // namespace

std::vector<int> delta_signs(const Matrix& w, const Matrix& e) {
  if (e.cols() != w.cols() || e.rows() != w.rows()) {
    throw Error(Errc::dimension_mismatch, "need one basis vector per input vector");
  }
  const Matrix gram = e.transpose() * e;
  if ((gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() > 1e-8) {
    throw Error(Errc::non_orthonormal_basis, "basis vectors are not orthonormal");
  }
  return signs_from_slopes(w, repulsion_slopes(w, e));
}

TargetPrototypes mean_prototypes(const ClassStats& stats) {
  TargetPrototypes out;
  out.prototypes = stats.means().transpose();
  out.class_ids = stats.class_ids();
  return out;
}

TargetPrototypes separate_prototypes(const ClassStats& stats, const WhitenTransform& whitener,
                                     double alpha) {
  const Index num_classes = stats.num_classes();
  if (num_classes < 2) {
    throw Error(Errc::too_few_classes, "repulsion needs at least 2 classes, have " + std::to_string(num_classes));
  }
  if (!(alpha >= 0.0)) throw Error(Errc::invalid_argument, "alpha must be >= 0");
  if (whitener.forward.rows() != stats.dim()) {
    throw Error(Errc::dimension_mismatch, "whitener dimension does not match statistics");
  }

  const Matrix whitened = whitener.forward * stats.means();  // d x C
  Eigen::BDCSVD<Matrix> svd(whitened, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw Error(Errc::eig_decomposition_failure, "SVD of whitened means failed");

  const Index rank = std::min(stats.dim(), num_classes);
  const Matrix& u = svd.matrixU();                // d x r
  const Vector& s = svd.singularValues();         // r
  const Matrix vt = svd.matrixV().transpose();    // r x C

  // w_i = columns of S V^T, e_i = columns of V^T. When C > d only the first r
  // columns have a basis direction; the remaining classes keep delta = 0.
  const Matrix w = s.asDiagonal() * vt;
  std::vector<int> delta;
  if (num_classes <= stats.dim()) {
    delta = delta_signs(w, vt);
  } else {
    delta = signs_from_slopes(w, repulsion_slopes(w, vt.leftCols(rank)));
  }

  Vector adjusted = s;
  for (Index k = 0; k < rank; ++k) adjusted(k) = std::max(0.0, s(k) + alpha * delta[static_cast<std::size_t>(k)]);
  const Matrix separated = u * adjusted.asDiagonal() * vt;

  TargetPrototypes out;
  out.alpha = alpha;
  out.class_ids = stats.class_ids();
  out.prototypes = (whitener.backward * separated).transpose();
  out.cos_sum_before = cosine_sum(whitened);
  try {
    out.cos_sum_after = cosine_sum(separated);
  } catch (const Error&) {
    // A class collapsed onto the origin after clamping; the metric is undefined.
    out.cos_sum_after = std::numeric_limits<double>::quiet_NaN();
  }
  for (int value : delta) ++out.delta_histogram[static_cast<std::size_t>(value + 1)];
  out.delta_histogram[1] += static_cast<int>(num_classes - static_cast<Index>(delta.size()));
  return out;
}

}  // namespace anacp
