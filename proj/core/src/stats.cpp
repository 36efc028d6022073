#include "anacp/stats.hpp"

#include "anacp/error.hpp"

#include <map>
#include <string>

namespace anacp {

ClassStats::ClassStats(Index dim) : dim_(dim), means_(dim, 0), scatter_(Matrix::Zero(dim, dim)) {
  if (dim <= 0) throw Error(Errc::invalid_argument, "stats dimension must be positive");
}

std::optional<Index> ClassStats::slot(ClassId id) const {
  const auto it = slots_.find(id);
  if (it == slots_.end()) return std::nullopt;
  return it->second;
}

Vector ClassStats::mean(ClassId id) const {
  const auto s = slot(id);
  if (!s) throw Error(Errc::unknown_class, "no statistics for class " + std::to_string(id));
  return means_.col(*s);
}

std::uint64_t ClassStats::count(ClassId id) const {
  const auto s = slot(id);
  return s ? counts_[static_cast<std::size_t>(*s)] : 0;
}

Matrix ClassStats::shared_cov() const {
  if (total_ == 0) return Matrix::Zero(dim_, dim_);
  return scatter_ / static_cast<double>(total_);
}

void ClassStats::update(const Matrix& X, std::span<const ClassId> labels) {
  if (X.cols() != dim_) {
    throw Error(Errc::dimension_mismatch, "expected " + std::to_string(dim_) + " features, got " +
                                              std::to_string(X.cols()));
  }
  if (static_cast<std::size_t>(X.rows()) != labels.size()) {
    throw Error(Errc::dimension_mismatch, "row count and label count differ");
  }

  // Group rows by class; std::map keeps the per-batch work in class-id order.
  std::map<ClassId, std::vector<Index>> rows_by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    rows_by_class[labels[i]].push_back(static_cast<Index>(i));
  }

  for (const auto& [id, rows] : rows_by_class) {
    const auto n = static_cast<Index>(rows.size());
    Matrix block(n, dim_);
    for (Index r = 0; r < n; ++r) block.row(r) = X.row(rows[static_cast<std::size_t>(r)]);
    const Vector batch_mean = block.colwise().mean().transpose();
    const Matrix centered = block.rowwise() - batch_mean.transpose();
    scatter_.noalias() += centered.transpose() * centered;

    if (const auto s = slot(id)) {
      const auto old_n = static_cast<double>(counts_[static_cast<std::size_t>(*s)]);
      const auto new_n = static_cast<double>(n);
      const Vector diff = means_.col(*s) - batch_mean;
      scatter_.noalias() += (old_n * new_n / (old_n + new_n)) * diff * diff.transpose();
      means_.col(*s) = (old_n * means_.col(*s) + new_n * batch_mean) / (old_n + new_n);
      counts_[static_cast<std::size_t>(*s)] += static_cast<std::uint64_t>(n);
    } else {
      const Index new_slot = num_classes();
      slots_.emplace(id, new_slot);
      class_ids_.push_back(id);
      means_.conservativeResize(Eigen::NoChange, new_slot + 1);
      means_.col(new_slot) = batch_mean;
      counts_.push_back(static_cast<std::uint64_t>(n));
    }
    total_ += static_cast<std::uint64_t>(n);
  }
  // Keep the scatter exactly symmetric despite rounding in the rank updates.
  scatter_ = 0.5 * (scatter_ + scatter_.transpose()).eval();
}

ClassStats ClassStats::from_parts(Index dim, std::vector<ClassId> class_ids, Matrix means,
                                  std::vector<std::uint64_t> counts, Matrix scatter) {
  if (means.rows() != dim || means.cols() != static_cast<Index>(class_ids.size()) ||
      counts.size() != class_ids.size() || scatter.rows() != dim || scatter.cols() != dim) {
    throw Error(Errc::dimension_mismatch, "inconsistent class statistics");
  }
  ClassStats stats(dim);
  stats.class_ids_ = std::move(class_ids);
  for (std::size_t i = 0; i < stats.class_ids_.size(); ++i) {
    stats.slots_.emplace(stats.class_ids_[i], static_cast<Index>(i));
  }
  stats.means_ = std::move(means);
  stats.counts_ = std::move(counts);
  stats.scatter_ = std::move(scatter);
  for (auto c : stats.counts_) stats.total_ += c;
  return stats;
}

double shrinkage_eps(const Matrix& cov, double eps_scale) {
  return eps_scale * cov.trace() / static_cast<double>(cov.rows());
}

WhitenTransform make_whitener(const Matrix& cov, double eps_scale) {
  if (cov.rows() != cov.cols() || cov.rows() == 0) {
    throw Error(Errc::dimension_mismatch, "covariance must be square and non-empty");
  }
  WhitenTransform out;
  out.eps = shrinkage_eps(cov, eps_scale);
  const Matrix regularised = cov + out.eps * Matrix::Identity(cov.rows(), cov.cols());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(regularised);
  if (eig.info() != Eigen::Success) {
    throw Error(Errc::eig_decomposition_failure, "symmetric eigendecomposition did not converge");
  }
  const Vector lambda = eig.eigenvalues().cwiseMax(1e-12);
  const Matrix& q = eig.eigenvectors();
  out.forward = q * lambda.cwiseSqrt().cwiseInverse().asDiagonal() * q.transpose();
  out.backward = q * lambda.cwiseSqrt().asDiagonal() * q.transpose();
  // Symmetrise away rounding from the triple product.
  out.forward = 0.5 * (out.forward + out.forward.transpose()).eval();
  out.backward = 0.5 * (out.backward + out.backward.transpose()).eval();
  return out;
}

WhitenTransform make_whitener(const ClassStats& stats, double eps_scale) {
  if (stats.total_count() == 0) throw Error(Errc::not_fitted, "no samples accumulated yet");
  return make_whitener(stats.shared_cov(), eps_scale);
}

}  // namespace anacp
