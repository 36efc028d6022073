#include "anacp/learner.hpp"

#include "anacp/checkpoint.hpp"
#include "anacp/error.hpp"

#include <algorithm>
#include <set>
#include <string>

namespace anacp {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::anacp: return "anacp";
    case Method::raw_ncm: return "raw_ncm";
    case Method::incremental_ridge: return "incremental_ridge";
    case Method::rp_ridge: return "rp_ridge";
  }
  return "unknown";
}

std::string_view to_string(ClassifierKind k) { return k == ClassifierKind::ncm ? "ncm" : "elm"; }
std::string_view to_string(NcmMetric m) { return m == NcmMetric::euclidean ? "euclidean" : "cosine"; }

Method parse_method(std::string_view name) {
  for (Method m : {Method::anacp, Method::raw_ncm, Method::incremental_ridge, Method::rp_ridge}) {
    if (name == to_string(m)) return m;
  }
  throw Error(Errc::invalid_argument,
              "unknown method '" + std::string(name) + "' (expected anacp, raw_ncm, incremental_ridge or rp_ridge)");
}

ClassifierKind parse_classifier(std::string_view name) {
  if (name == "ncm") return ClassifierKind::ncm;
  if (name == "elm") return ClassifierKind::elm;
  throw Error(Errc::invalid_argument, "unknown classifier '" + std::string(name) + "' (expected ncm or elm)");
}

NcmMetric parse_metric(std::string_view name) {
  if (name == "euclidean") return NcmMetric::euclidean;
  if (name == "cosine") return NcmMetric::cosine;
  throw Error(Errc::invalid_argument, "unknown NCM metric '" + std::string(name) + "'");
}

void LearnerConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(Errc::invalid_argument, what); };
  if (rp_dim < 1) fail("--rp-dim must be >= 1");
  if (heads < 1) fail("--heads must be >= 1");
  if (replay < 1 && method == Method::anacp && classifier == ClassifierKind::elm) {
    fail("--replay must be >= 1 for the ELM classifier");
  }
  if (!(lambda_cp >= 0.0)) fail("--lambda-cp must be >= 0");
  if (!(lambda_cls >= 0.0)) fail("--lambda-cls must be >= 0");
  if (!(alpha >= 0.0)) fail("--alpha must be >= 0");
  if (!(eps_scale >= 0.0)) fail("eps_scale must be >= 0");
}

CPConfig LearnerConfig::cp_config() const {
  CPConfig cp;
  cp.rp_dim = rp_dim;
  cp.heads = heads;
  cp.lambda = lambda_cp;
  cp.alpha = alpha;
  cp.eps_scale = eps_scale;
  cp.use_repulsion = use_repulsion;
  cp.base_seed = base_seed;
  return cp;
}

nlohmann::ordered_json to_json(const LearnerConfig& c) {
  nlohmann::ordered_json j;
  j["method"] = to_string(c.method);
  j["rp_dim"] = c.rp_dim;
  j["heads"] = c.heads;
  j["replay"] = c.replay;
  j["lambda_cp"] = c.lambda_cp;
  j["lambda_cls"] = c.lambda_cls;
  j["alpha"] = c.alpha;
  j["eps_scale"] = c.eps_scale;
  j["base_seed"] = c.base_seed;
  j["use_repulsion"] = c.use_repulsion;
  j["classifier"] = to_string(c.classifier);
  j["ncm_metric"] = to_string(c.metric);
  j["l2_normalize"] = c.l2_normalize;
  return j;
}

LearnerConfig config_from_json(const nlohmann::json& j, LearnerConfig c) {
  try {
    if (j.contains("method")) c.method = parse_method(j["method"].get<std::string>());
    if (j.contains("rp_dim")) c.rp_dim = j["rp_dim"].get<Index>();
    if (j.contains("heads")) c.heads = j["heads"].get<int>();
    if (j.contains("replay")) c.replay = j["replay"].get<int>();
    if (j.contains("lambda_cp")) c.lambda_cp = j["lambda_cp"].get<double>();
    if (j.contains("lambda_cls")) c.lambda_cls = j["lambda_cls"].get<double>();
    if (j.contains("alpha")) c.alpha = j["alpha"].get<double>();
    if (j.contains("eps_scale")) c.eps_scale = j["eps_scale"].get<double>();
    if (j.contains("base_seed")) c.base_seed = j["base_seed"].get<std::uint64_t>();
    if (j.contains("use_repulsion")) c.use_repulsion = j["use_repulsion"].get<bool>();
    if (j.contains("classifier")) c.classifier = parse_classifier(j["classifier"].get<std::string>());
    if (j.contains("ncm_metric")) c.metric = parse_metric(j["ncm_metric"].get<std::string>());
    if (j.contains("l2_normalize")) c.l2_normalize = j["l2_normalize"].get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse_error, std::string("learner config: ") + e.what());
  }
  return c;
}

ParameterCount anacp_parameter_count(std::uint64_t num_classes, std::uint64_t dim, std::uint64_t rp_dim,
                                     std::uint64_t heads, bool with_elm) {
  ParameterCount p;
  p.class_means = num_classes * dim;
  p.covariance = dim * dim;
  p.rp_matrices = heads * dim * rp_dim;
  p.gram_matrices = heads * rp_dim * rp_dim;
  p.rp_prototypes = heads * num_classes * rp_dim;
  p.projections = heads * rp_dim * dim;
  if (with_elm) {
    p.classifier_rp = dim * rp_dim;
    p.classifier_weights = rp_dim * num_classes;
  }
  return p;
}

Learner::Learner(LearnerConfig config, Index dim) : config_(config), dim_(dim) {
  config_.validate();
  if (dim < 1) throw Error(Errc::invalid_argument, "feature dimension must be >= 1");
}

Matrix Learner::prepare(const Matrix& X) const {
  if (X.cols() != dim_) {
    throw Error(Errc::dimension_mismatch, "expected " + std::to_string(dim_) + " features, got " +
                                              std::to_string(X.cols()));
  }
  if (!config_.l2_normalize) return X;
  return X.rowwise().normalized();
}

void Learner::learn(const Matrix& X, std::span<const ClassId> labels) {
  if (static_cast<std::size_t>(X.rows()) != labels.size()) {
    throw Error(Errc::dimension_mismatch, "row count and label count differ");
  }
  if (labels.empty()) throw Error(Errc::invalid_argument, "task has no training samples");
  const std::set<ClassId> classes(labels.begin(), labels.end());
  for (ClassId id : classes) {
    if (seen_.contains(id)) throw Error(Errc::repeated_class, "class " + std::to_string(id) + " was already learned");
  }
  fit_batch(prepare(X), labels);
  task_classes_.emplace_back(classes.begin(), classes.end());
  seen_.insert(classes.begin(), classes.end());
}

void Learner::learn_task(const Task& task) {
  for (ClassId id : task.train.labels) {
    if (std::find(task.classes.begin(), task.classes.end(), id) == task.classes.end()) {
      throw Error(Errc::invalid_argument, "training label " + std::to_string(id) + " is not in the task's class set");
    }
  }
  learn(task.train.as_double(), task.train.labels);
  // Keep the declared class set (and its order) for task-incremental masking.
  task_classes_.back() = task.classes;
}

std::vector<ClassId> Learner::predict(const Matrix& X, PredictMode mode) const {
  if (!fitted()) throw Error(Errc::not_fitted, "learner has not seen any task");
  const Matrix prepared = prepare(X);
  if (prepared.rows() == 0) return {};
  if (const auto* til = std::get_if<Til>(&mode)) {
    if (til->task >= task_classes_.size()) {
      throw Error(Errc::unknown_task, "task " + std::to_string(til->task) + " has not been learned");
    }
    return classify(prepared, task_classes_[til->task]);
  }
  return classify(prepared, {});
}

void Learner::save(BinaryWriter& out) const {
  out.u64(task_classes_.size());
  for (const auto& classes : task_classes_) out.ids(classes);
  write_state(out);
}

void Learner::restore(BinaryReader& in) {
  const auto tasks = in.u64();
  task_classes_.clear();
  seen_.clear();
  for (std::uint64_t t = 0; t < tasks; ++t) {
    task_classes_.push_back(in.ids());
    seen_.insert(task_classes_.back().begin(), task_classes_.back().end());
  }
  read_state(in);
}

std::unique_ptr<Learner> make_learner(const LearnerConfig& config, Index dim) {
  switch (config.method) {
    case Method::anacp: return std::make_unique<AnaCPLearner>(config, dim);
    case Method::raw_ncm: return std::make_unique<RawNcmLearner>(config, dim);
    case Method::incremental_ridge:
    case Method::rp_ridge: return std::make_unique<RidgeLearner>(config, dim);
  }
  throw Error(Errc::invalid_argument, "unknown method");
}

namespace {

void write_stats(BinaryWriter& out, const ClassStats& stats) {
  out.ids(stats.class_ids());
  out.counts(stats.counts());
  out.matrix(stats.means());
  out.matrix(stats.scatter());
}

ClassStats read_stats(BinaryReader& in, Index dim) {
  auto ids = in.ids();
  auto counts = in.counts();
  Matrix means = in.matrix();
  Matrix scatter = in.matrix();
  if (means.cols() == 0) means.resize(dim, 0);
  return ClassStats::from_parts(dim, std::move(ids), std::move(means), std::move(counts), std::move(scatter));
}

}  // namespace

// --- raw NCM ---------------------------------------------------------------

RawNcmLearner::RawNcmLearner(LearnerConfig config, Index dim) : Learner(config, dim), stats_(dim) {}

void RawNcmLearner::fit_batch(const Matrix& X, std::span<const ClassId> labels) { stats_.update(X, labels); }

std::vector<ClassId> RawNcmLearner::classify(const Matrix& X, std::span<const ClassId> allowed) const {
  return ncm_classify(X, mean_prototypes(stats_), config().metric, allowed);
}

ParameterCount RawNcmLearner::parameter_count() const {
  ParameterCount p;
  p.class_means = static_cast<std::uint64_t>(stats_.num_classes() * dim());
  return p;
}

void RawNcmLearner::write_state(BinaryWriter& out) const { write_stats(out, stats_); }
void RawNcmLearner::read_state(BinaryReader& in) { stats_ = read_stats(in, dim()); }

// --- incremental ridge / RP + ridge ----------------------------------------

RidgeLearner::RidgeLearner(LearnerConfig config, Index dim) : Learner(config, dim) {
  Index feature_dim = dim;
  if (config.method == Method::rp_ridge) {
    rp_ = random_projection(dim, config.rp_dim, config.base_seed + kClassifierSeedOffset);
    feature_dim = config.rp_dim;
  }
  acc_ = GramAccumulator(feature_dim, config.lambda_cls);
}

Matrix RidgeLearner::features(const Matrix& X) const { return rp_ ? project(*rp_, X) : X; }

void RidgeLearner::fit_batch(const Matrix& X, std::span<const ClassId> labels) {
  std::vector<Index> slots(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto it = std::find(class_ids_.begin(), class_ids_.end(), labels[i]);
    if (it == class_ids_.end()) {
      class_ids_.push_back(labels[i]);
      it = class_ids_.end() - 1;
    }
    slots[i] = static_cast<Index>(it - class_ids_.begin());
  }
  acc_.accumulate(features(X), one_hot(slots, static_cast<Index>(class_ids_.size())));
  weights_ = acc_.solve();
}

std::vector<ClassId> RidgeLearner::classify(const Matrix& X, std::span<const ClassId> allowed) const {
  return argmax_labels(features(X) * weights_, class_ids_, allowed);
}

ParameterCount RidgeLearner::parameter_count() const {
  ParameterCount p;
  const auto width = static_cast<std::uint64_t>(acc_.dim());
  const auto classes = static_cast<std::uint64_t>(class_ids_.size());
  p.gram_matrices = width * width;
  p.classifier_weights = width * classes;
  if (rp_) p.classifier_rp = static_cast<std::uint64_t>(dim()) * width;
  return p;
}

void RidgeLearner::write_state(BinaryWriter& out) const {
  out.ids(class_ids_);
  out.f64(acc_.lambda());
  out.matrix(acc_.gram());
  out.matrix(acc_.cross());
}

void RidgeLearner::read_state(BinaryReader& in) {
  class_ids_ = in.ids();
  const double lambda = in.f64();
  Matrix gram = in.matrix();
  Matrix cross = in.matrix();
  if (cross.cols() == 0) cross.resize(gram.rows(), 0);
  acc_ = GramAccumulator::from_parts(std::move(gram), std::move(cross), lambda);
  weights_ = class_ids_.empty() ? Matrix() : acc_.solve();
}

// --- AnaCP -------------------------------------------------------------------

AnaCPLearner::AnaCPLearner(LearnerConfig config, Index dim)
    : Learner(config, dim), stats_(dim), cp_(dim, config.cp_config()) {}

void AnaCPLearner::fit_batch(const Matrix& X, std::span<const ClassId> labels) {
  ClassStats next = stats_;
  next.update(X, labels);
  cp_.update(X, labels, next);
  stats_ = std::move(next);
  if (config().classifier == ClassifierKind::elm) {
    const std::uint64_t seed = config().base_seed;
    elm_ = rebuild_elm(cp_, stats_, config().replay, config().lambda_cls, config().rp_dim,
                       seed + kClassifierSeedOffset, seed + kReplaySeedOffset + updates_, config().eps_scale);
  }
  ++updates_;
}

std::vector<ClassId> AnaCPLearner::classify(const Matrix& X, std::span<const ClassId> allowed) const {
  const Matrix U = cp_.transform(X);
  if (config().classifier == ClassifierKind::elm) {
    if (!elm_) throw Error(Errc::not_fitted, "ELM classifier missing");
    return elm_->classify(U, allowed);
  }
  return ncm_classify(U, cp_.prototypes(), config().metric, allowed);
}

ParameterCount AnaCPLearner::parameter_count() const {
  return anacp_parameter_count(static_cast<std::uint64_t>(stats_.num_classes()), static_cast<std::uint64_t>(dim()),
                               static_cast<std::uint64_t>(config().rp_dim), static_cast<std::uint64_t>(config().heads),
                               config().classifier == ClassifierKind::elm);
}

TaskDiagnostics AnaCPLearner::last_diagnostics() const {
  TaskDiagnostics diag;
  if (!cp_.fitted()) return diag;
  const auto& protos = cp_.prototypes();
  if (config().use_repulsion && protos.size() >= 2) {
    diag.cos_sum_before = protos.cos_sum_before;
    diag.cos_sum_after = protos.cos_sum_after;
    diag.delta_histogram = protos.delta_histogram;
  }
  return diag;
}

void AnaCPLearner::write_state(BinaryWriter& out) const {
  write_stats(out, stats_);
  out.u64(updates_);
  out.ids(cp_.class_ids());
  out.u64(cp_.heads().size());
  for (const auto& head : cp_.heads()) {
    out.u64(head.rp.seed);
    out.matrix(head.gram);
    out.matrix(head.proto_sums);
    out.matrix(head.weights);
  }
  out.u8(elm_ ? 1 : 0);
  if (elm_) {
    out.u64(elm_->rp().seed);
    out.f64(elm_->lambda());
    out.ids(elm_->class_ids());
    out.matrix(elm_->weights());
  }
}

void AnaCPLearner::read_state(BinaryReader& in) {
  stats_ = read_stats(in, dim());
  updates_ = in.u64();
  auto class_ids = in.ids();
  const auto num_heads = in.u64();
  std::vector<CPHead> heads(num_heads);
  for (auto& head : heads) {
    head.rp.seed = in.u64();
    head.gram = in.matrix();
    head.proto_sums = in.matrix();
    if (head.proto_sums.cols() == 0) head.proto_sums.resize(head.gram.rows(), 0);
    head.weights = in.matrix();
  }
  cp_ = CPLayer::from_parts(dim(), config().cp_config(), std::move(class_ids), std::move(heads), stats_);
  elm_.reset();
  if (in.u8() != 0) {
    const auto seed = in.u64();
    const double lambda = in.f64();
    auto ids = in.ids();
    Matrix weights = in.matrix();
    elm_ = ElmClassifier::from_parts(dim(), config().rp_dim, lambda, seed, std::move(ids), std::move(weights));
  }
}

}  // namespace anacp
