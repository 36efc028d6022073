#include "anacp/cp_layer.hpp"

#include "anacp/error.hpp"

#include <string>

namespace anacp {

void CPConfig::validate() const {
  if (rp_dim < 1) throw Error(Errc::invalid_argument, "RP dimension must be >= 1");
  if (heads < 1) throw Error(Errc::invalid_argument, "CP needs at least one head");
  if (!(lambda >= 0.0)) throw Error(Errc::invalid_argument, "CP lambda must be >= 0");
  if (!(alpha >= 0.0)) throw Error(Errc::invalid_argument, "alpha must be >= 0");
  if (!(eps_scale >= 0.0)) throw Error(Errc::invalid_argument, "eps_scale must be >= 0");
}

CPLayer::CPLayer(Index input_dim, CPConfig config) : input_dim_(input_dim), config_(config) {
  config_.validate();
  if (input_dim < 1) throw Error(Errc::invalid_argument, "input dimension must be >= 1");
  heads_.reserve(static_cast<std::size_t>(config_.heads));
  for (int h = 0; h < config_.heads; ++h) {
    CPHead head;
    head.rp = random_projection(input_dim, config_.rp_dim, config_.base_seed + static_cast<std::uint64_t>(h));
    head.gram = Matrix::Zero(config_.rp_dim, config_.rp_dim);
    head.proto_sums.resize(config_.rp_dim, 0);
    heads_.push_back(std::move(head));
  }
}

void CPLayer::update(const Matrix& X, std::span<const ClassId> labels, const ClassStats& stats) {
  if (X.cols() != input_dim_) {
    throw Error(Errc::dimension_mismatch, "CP layer expects " + std::to_string(input_dim_) + " features, got " +
                                              std::to_string(X.cols()));
  }
  if (static_cast<std::size_t>(X.rows()) != labels.size()) {
    throw Error(Errc::dimension_mismatch, "row count and label count differ");
  }
  for (ClassId id : labels) {
    if (!stats.has_class(id)) {
      throw Error(Errc::stats_out_of_sync, "class " + std::to_string(id) + " is missing from the statistics");
    }
  }

  // Slots for classes new to this layer, in order of first appearance.
  std::vector<Index> row_slots(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = slots_.try_emplace(labels[i], static_cast<Index>(class_ids_.size()));
    if (inserted) class_ids_.push_back(labels[i]);
    row_slots[i] = it->second;
  }
  const auto width = static_cast<Index>(class_ids_.size());

  for (auto& head : heads_) {
    const Matrix Z = project(head.rp, X);
    head.gram.selfadjointView<Eigen::Lower>().rankUpdate(Z.transpose());
    head.gram.triangularView<Eigen::StrictlyUpper>() = head.gram.transpose();
    const Index old_width = head.proto_sums.cols();
    head.proto_sums.conservativeResize(Eigen::NoChange, width);
    head.proto_sums.rightCols(width - old_width).setZero();
    for (Index r = 0; r < Z.rows(); ++r) head.proto_sums.col(row_slots[static_cast<std::size_t>(r)]) += Z.row(r).transpose();
  }
  refit(stats);
}

void CPLayer::rebuild_prototypes(const ClassStats& stats) {
  if (config_.use_repulsion && stats.num_classes() >= 2) {
    prototypes_ = separate_prototypes(stats, make_whitener(stats, config_.eps_scale), config_.alpha);
  } else {
    prototypes_ = mean_prototypes(stats);
  }
}

Matrix CPLayer::aligned_targets() const {
  std::unordered_map<ClassId, Index> proto_rows;
  for (std::size_t k = 0; k < prototypes_.class_ids.size(); ++k) {
    proto_rows.emplace(prototypes_.class_ids[k], static_cast<Index>(k));
  }
  Matrix targets(static_cast<Index>(class_ids_.size()), input_dim_);
  for (std::size_t k = 0; k < class_ids_.size(); ++k) {
    const auto it = proto_rows.find(class_ids_[k]);
    if (it == proto_rows.end()) {
      throw Error(Errc::stats_out_of_sync, "no prototype for class " + std::to_string(class_ids_[k]));
    }
    targets.row(static_cast<Index>(k)) = prototypes_.prototypes.row(it->second);
  }
  return targets;
}

Matrix CPLayer::cross_matrix(std::size_t head) const {
  return heads_.at(head).proto_sums * aligned_targets();
}

void CPLayer::refit(const ClassStats& stats) {
  if (class_ids_.empty()) return;
  rebuild_prototypes(stats);
  const Matrix targets = aligned_targets();
  for (auto& head : heads_) {
    head.weights = ridge_solve(head.gram, head.proto_sums * targets, config_.lambda);
  }
  fitted_ = true;
}

Matrix CPLayer::transform(const Matrix& X) const {
  if (!fitted_) throw Error(Errc::not_fitted, "CP layer has not seen any task");
  if (X.cols() != input_dim_) {
    throw Error(Errc::dimension_mismatch, "CP layer expects " + std::to_string(input_dim_) + " features, got " +
                                              std::to_string(X.cols()));
  }
  Matrix out = Matrix::Zero(X.rows(), input_dim_);
  for (const auto& head : heads_) out.noalias() += project(head.rp, X) * head.weights;
  return out / static_cast<double>(heads_.size());
}

CPLayer CPLayer::from_parts(Index input_dim, CPConfig config, std::vector<ClassId> class_ids,
                            std::vector<CPHead> heads, const ClassStats& stats) {
  config.validate();
  if (heads.size() != static_cast<std::size_t>(config.heads)) {
    throw Error(Errc::dimension_mismatch, "checkpoint head count does not match the configuration");
  }
  CPLayer layer;
  layer.input_dim_ = input_dim;
  layer.config_ = config;
  layer.class_ids_ = std::move(class_ids);
  for (std::size_t k = 0; k < layer.class_ids_.size(); ++k) {
    layer.slots_.emplace(layer.class_ids_[k], static_cast<Index>(k));
  }
  for (auto& head : heads) {
    head.rp = random_projection(input_dim, config.rp_dim, head.rp.seed);
    if (head.gram.rows() != config.rp_dim || head.proto_sums.cols() != static_cast<Index>(layer.class_ids_.size())) {
      throw Error(Errc::dimension_mismatch, "checkpoint head has inconsistent shapes");
    }
  }
  layer.heads_ = std::move(heads);
  if (!layer.class_ids_.empty()) {
    layer.rebuild_prototypes(stats);
    layer.fitted_ = true;
    for (const auto& head : layer.heads_) {
      if (head.weights.rows() != config.rp_dim || head.weights.cols() != input_dim) {
        throw Error(Errc::dimension_mismatch, "checkpoint head weights have the wrong shape");
      }
    }
  }
  return layer;
}

}  // namespace anacp
