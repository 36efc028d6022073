#pragma once

#include "anacp/analytic.hpp"
#include "anacp/classifier.hpp"
#include "anacp/cp_layer.hpp"
#include "anacp/feature_store.hpp"
#include "anacp/stats.hpp"
#include "anacp/types.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <variant>
#include <vector>

namespace anacp {

class BinaryWriter;
class BinaryReader;

enum class Method { anacp, raw_ncm, incremental_ridge, rp_ridge };
enum class ClassifierKind { ncm, elm };

std::string_view to_string(Method m);
std::string_view to_string(ClassifierKind k);
std::string_view to_string(NcmMetric m);
Method parse_method(std::string_view name);
ClassifierKind parse_classifier(std::string_view name);
NcmMetric parse_metric(std::string_view name);

struct LearnerConfig {
  Method method = Method::anacp;
  Index rp_dim = 5000;
  int heads = 3;
  int replay = kDefaultReplayPerClass;
  double lambda_cp = kDefaultLambda;
  double lambda_cls = kDefaultLambda;
  double alpha = kDefaultAlpha;
  double eps_scale = kDefaultEpsScale;
  std::uint64_t base_seed = 0;
  bool use_repulsion = true;
  ClassifierKind classifier = ClassifierKind::elm;
  NcmMetric metric = NcmMetric::euclidean;
  bool l2_normalize = false;

  void validate() const;
  CPConfig cp_config() const;
};

nlohmann::ordered_json to_json(const LearnerConfig& config);
/// Keys absent from `j` keep the values already in `base`.
LearnerConfig config_from_json(const nlohmann::json& j, LearnerConfig base = {});

/// Stored-parameter accounting: everything a learner keeps between tasks.
struct ParameterCount {
  std::uint64_t class_means = 0;
  std::uint64_t covariance = 0;
  std::uint64_t rp_matrices = 0;
  std::uint64_t gram_matrices = 0;
  std::uint64_t rp_prototypes = 0;
  std::uint64_t projections = 0;
  std::uint64_t classifier_rp = 0;
  std::uint64_t classifier_weights = 0;

  std::uint64_t total() const {
    return class_means + covariance + rp_matrices + gram_matrices + rp_prototypes + projections +
           classifier_rp + classifier_weights;
  }
};

/// C means of size d, one d x d covariance, and per head a d x D projection,
/// a D x D Gram, C random-space prototypes of size D and a D x d projection.
/// The ELM classifier adds a d x D projection and D x C weights.
ParameterCount anacp_parameter_count(std::uint64_t num_classes, std::uint64_t dim, std::uint64_t rp_dim,
                                     std::uint64_t heads, bool with_elm);

struct Cil {};
struct Til {
  std::size_t task = 0;
};
/// CIL predicts among every seen class; TIL restricts to one task's classes.
using PredictMode = std::variant<Cil, Til>;

struct TaskDiagnostics {
  std::optional<double> cos_sum_before;
  std::optional<double> cos_sum_after;
  std::array<int, 3> delta_histogram{};
};

/// Common driver for all class-incremental learners.
class Learner {
 public:
  Learner(LearnerConfig config, Index dim);
  virtual ~Learner() = default;

  Learner(const Learner&) = delete;
  Learner& operator=(const Learner&) = delete;

  /// Every class in the task must be new (Errc::repeated_class otherwise).
  void learn_task(const Task& task);
  void learn(const Matrix& X, std::span<const ClassId> labels);

  std::vector<ClassId> predict(const Matrix& X, PredictMode mode = Cil{}) const;

  const LearnerConfig& config() const { return config_; }
  Index dim() const { return dim_; }
  std::size_t num_tasks() const { return task_classes_.size(); }
  const std::vector<std::vector<ClassId>>& task_classes() const { return task_classes_; }
  std::size_t num_classes() const { return seen_.size(); }
  bool fitted() const { return !task_classes_.empty(); }

  virtual ParameterCount parameter_count() const = 0;
  virtual TaskDiagnostics last_diagnostics() const { return {}; }

  void save(BinaryWriter& out) const;
  void restore(BinaryReader& in);

 protected:
  virtual void fit_batch(const Matrix& X, std::span<const ClassId> labels) = 0;
  virtual std::vector<ClassId> classify(const Matrix& X, std::span<const ClassId> allowed) const = 0;
  virtual void write_state(BinaryWriter& out) const = 0;
  virtual void read_state(BinaryReader& in) = 0;

  Matrix prepare(const Matrix& X) const;

 private:
  LearnerConfig config_;
  Index dim_;
  std::vector<std::vector<ClassId>> task_classes_;
  std::unordered_set<ClassId> seen_;
};

std::unique_ptr<Learner> make_learner(const LearnerConfig& config, Index dim);

/// Nearest class mean on the raw features.
class RawNcmLearner final : public Learner {
 public:
  RawNcmLearner(LearnerConfig config, Index dim);
  ParameterCount parameter_count() const override;
  const ClassStats& stats() const { return stats_; }

 protected:
  void fit_batch(const Matrix& X, std::span<const ClassId> labels) override;
  std::vector<ClassId> classify(const Matrix& X, std::span<const ClassId> allowed) const override;
  void write_state(BinaryWriter& out) const override;
  void read_state(BinaryReader& in) override;

 private:
  ClassStats stats_;
};

/// Incremental ridge regression with one-hot targets, either on the raw
/// features (incremental_ridge) or on GELU random features (rp_ridge).
class RidgeLearner final : public Learner {
 public:
  RidgeLearner(LearnerConfig config, Index dim);
  ParameterCount parameter_count() const override;

  const GramAccumulator& accumulator() const { return acc_; }
  const Matrix& weights() const { return weights_; }
  const std::vector<ClassId>& class_ids() const { return class_ids_; }
  Matrix features(const Matrix& X) const;

 protected:
  void fit_batch(const Matrix& X, std::span<const ClassId> labels) override;
  std::vector<ClassId> classify(const Matrix& X, std::span<const ClassId> allowed) const override;
  void write_state(BinaryWriter& out) const override;
  void read_state(BinaryReader& in) override;

 private:
  std::optional<RPMatrix> rp_;
  GramAccumulator acc_;
  Matrix weights_;
  std::vector<ClassId> class_ids_;
};

/// Statistics -> contrastive projection -> NCM or pseudo-replay ELM.
class AnaCPLearner final : public Learner {
 public:
  AnaCPLearner(LearnerConfig config, Index dim);
  ParameterCount parameter_count() const override;
  TaskDiagnostics last_diagnostics() const override;

  const ClassStats& stats() const { return stats_; }
  const CPLayer& cp() const { return cp_; }
  const std::optional<ElmClassifier>& elm() const { return elm_; }
  Matrix transform(const Matrix& X) const { return cp_.transform(prepare(X)); }

 protected:
  void fit_batch(const Matrix& X, std::span<const ClassId> labels) override;
  std::vector<ClassId> classify(const Matrix& X, std::span<const ClassId> allowed) const override;
  void write_state(BinaryWriter& out) const override;
  void read_state(BinaryReader& in) override;

 private:
  ClassStats stats_;
  CPLayer cp_;
  std::optional<ElmClassifier> elm_;
  std::uint64_t updates_ = 0;
};

}  // namespace anacp
