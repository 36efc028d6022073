#include "anacp/report.hpp"

#include "anacp/error.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace anacp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

nlohmann::ordered_json matrix_json(const Matrix& m) {
  auto rows = nlohmann::ordered_json::array();
  for (Index t = 0; t < m.rows(); ++t) {
    auto row = nlohmann::ordered_json::array();
    for (Index i = 0; i < m.cols(); ++i) {
      if (std::isnan(m(t, i))) row.push_back(nullptr);
      else row.push_back(m(t, i));
    }
    rows.push_back(row);
  }
  return rows;
}

Matrix matrix_from_json(const nlohmann::json& j) {
  const auto rows = static_cast<Index>(j.size());
  Matrix m = Matrix::Constant(rows, rows, kNaN);
  for (Index t = 0; t < rows; ++t) {
    const auto& row = j[static_cast<std::size_t>(t)];
    for (Index i = 0; i < static_cast<Index>(row.size()) && i < rows; ++i) {
      if (!row[static_cast<std::size_t>(i)].is_null()) m(t, i) = row[static_cast<std::size_t>(i)].get<double>();
    }
  }
  return m;
}

}  // namespace

double accuracy_percent(std::span<const ClassId> predicted, std::span<const ClassId> truth) {
  if (predicted.size() != truth.size()) throw Error(Errc::dimension_mismatch, "prediction/label count mismatch");
  if (truth.empty()) return kNaN;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) correct += predicted[i] == truth[i] ? 1 : 0;
  return 100.0 * static_cast<double>(correct) / static_cast<double>(truth.size());
}

double average_incremental_accuracy(std::span<const double> per_task) {
  if (per_task.empty()) return kNaN;
  return std::accumulate(per_task.begin(), per_task.end(), 0.0) / static_cast<double>(per_task.size());
}

double rel_error_reduction(double a0, double ai) {
  if (!(a0 < 100.0)) throw Error(Errc::degenerate_baseline, "baseline accuracy must be below 100");
  if (a0 < 0.0) throw Error(Errc::invalid_argument, "baseline accuracy must be >= 0");
  return (ai - a0) / (100.0 - a0) * 100.0;
}

double max_column_drift(const Matrix& acc) {
  double drift = 0.0;
  for (Index i = 0; i < acc.cols(); ++i) {
    for (Index t = i; t < acc.rows(); ++t) {
      if (!std::isnan(acc(t, i)) && !std::isnan(acc(i, i))) drift = std::max(drift, std::abs(acc(t, i) - acc(i, i)));
    }
  }
  return drift;
}

RunReport run_stream(const LearnerConfig& config, const TaskStream& stream) {
  if (stream.tasks.empty()) throw Error(Errc::invalid_argument, "task stream is empty");
  const Index dim = stream.tasks.front().train.dim();
  auto learner = make_learner(config, dim);
  const auto num_tasks = static_cast<Index>(stream.size());

  RunReport report;
  report.config = config;
  report.stream_seed = stream.seed;
  report.label = std::string(to_string(config.method));
  report.acc_cil = Matrix::Constant(num_tasks, num_tasks, kNaN);
  report.acc_til = Matrix::Constant(num_tasks, num_tasks, kNaN);

  std::vector<Matrix> test_inputs;
  for (const auto& task : stream.tasks) test_inputs.push_back(task.test.as_double());

  for (Index t = 0; t < num_tasks; ++t) {
    const Task& task = stream.tasks[static_cast<std::size_t>(t)];
    const auto start = std::chrono::steady_clock::now();
    learner->learn_task(task);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    report.task_seconds.push_back(elapsed.count());
    report.task_classes.push_back(task.classes);
    report.diagnostics.push_back(learner->last_diagnostics());

    std::size_t correct = 0;
    std::size_t total = 0;
    for (Index i = 0; i <= t; ++i) {
      const Task& seen = stream.tasks[static_cast<std::size_t>(i)];
      const Matrix& X = test_inputs[static_cast<std::size_t>(i)];
      if (X.rows() == 0) continue;
      const auto cil = learner->predict(X, Cil{});
      const auto til = learner->predict(X, Til{static_cast<std::size_t>(i)});
      report.acc_cil(t, i) = accuracy_percent(cil, seen.test.labels);
      report.acc_til(t, i) = accuracy_percent(til, seen.test.labels);
      for (std::size_t k = 0; k < cil.size(); ++k) correct += cil[k] == seen.test.labels[k] ? 1 : 0;
      total += cil.size();
    }
    report.cumulative_accuracy.push_back(total ? 100.0 * static_cast<double>(correct) / static_cast<double>(total)
                                               : kNaN);
  }
  report.a_last = report.cumulative_accuracy.back();
  report.a_avg = average_incremental_accuracy(report.cumulative_accuracy);
  report.parameters = learner->parameter_count();
  return report;
}

nlohmann::ordered_json to_json(const RunReport& r) {
  nlohmann::ordered_json j;
  j["label"] = r.label;
  j["method"] = to_string(r.config.method);
  j["a_last"] = r.a_last;
  j["a_avg"] = r.a_avg;
  j["stream_seed"] = r.stream_seed;
  j["num_tasks"] = r.num_tasks();
  j["task_classes"] = r.task_classes;
  j["cumulative_accuracy"] = r.cumulative_accuracy;
  j["acc_matrix_cil"] = matrix_json(r.acc_cil);
  j["acc_matrix_til"] = matrix_json(r.acc_til);
  j["task_seconds"] = r.task_seconds;

  nlohmann::ordered_json diag;
  diag["cos_sum_before"] = nlohmann::ordered_json::array();
  diag["cos_sum_after"] = nlohmann::ordered_json::array();
  diag["delta_histogram"] = nlohmann::ordered_json::array();
  for (const auto& d : r.diagnostics) {
    diag["cos_sum_before"].push_back(d.cos_sum_before ? nlohmann::ordered_json(*d.cos_sum_before) : nlohmann::ordered_json(nullptr));
    diag["cos_sum_after"].push_back(d.cos_sum_after && !std::isnan(*d.cos_sum_after)
                                        ? nlohmann::ordered_json(*d.cos_sum_after)
                                        : nlohmann::ordered_json(nullptr));
    diag["delta_histogram"].push_back(d.delta_histogram);
  }
  j["diagnostics"] = diag;

  const auto& p = r.parameters;
  nlohmann::ordered_json params;
  params["total"] = p.total();
  params["class_means"] = p.class_means;
  params["covariance"] = p.covariance;
  params["rp_matrices"] = p.rp_matrices;
  params["gram_matrices"] = p.gram_matrices;
  params["rp_prototypes"] = p.rp_prototypes;
  params["projections"] = p.projections;
  params["classifier_rp"] = p.classifier_rp;
  params["classifier_weights"] = p.classifier_weights;
  j["parameters"] = params;
  j["config"] = to_json(r.config);
  return j;
}

RunReport report_from_json(const nlohmann::json& j) {
  RunReport r;
  r.a_last = j.at("a_last").get<double>();
  r.a_avg = j.at("a_avg").get<double>();
  if (j.contains("config")) r.config = config_from_json(j["config"]);
  else if (j.contains("method")) r.config.method = parse_method(j["method"].get<std::string>());
  r.label = j.value("label", std::string(to_string(r.config.method)));
  r.stream_seed = j.value("stream_seed", std::uint64_t{0});
  r.task_classes = j.value("task_classes", std::vector<std::vector<ClassId>>{});
  r.cumulative_accuracy = j.value("cumulative_accuracy", std::vector<double>{});
  r.task_seconds = j.value("task_seconds", std::vector<double>{});
  if (j.contains("acc_matrix_cil")) r.acc_cil = matrix_from_json(j["acc_matrix_cil"]);
  if (j.contains("acc_matrix_til")) r.acc_til = matrix_from_json(j["acc_matrix_til"]);
  if (j.contains("diagnostics")) {
    const auto& d = j["diagnostics"];
    const auto& before = d.at("cos_sum_before");
    const auto& after = d.at("cos_sum_after");
    const auto& hist = d.at("delta_histogram");
    if (before.size() != hist.size() || after.size() != hist.size()) {
      throw Error(Errc::parse_error, "diagnostics arrays differ in length");
    }
    for (std::size_t t = 0; t < hist.size(); ++t) {
      TaskDiagnostics td;
      if (!before[t].is_null()) td.cos_sum_before = before[t].get<double>();
      if (!after[t].is_null()) td.cos_sum_after = after[t].get<double>();
      td.delta_histogram = hist[t].get<std::array<int, 3>>();
      r.diagnostics.push_back(td);
    }
  }
  if (j.contains("parameters")) {
    const auto& p = j["parameters"];
    r.parameters.class_means = p.value("class_means", std::uint64_t{0});
    r.parameters.covariance = p.value("covariance", std::uint64_t{0});
    r.parameters.rp_matrices = p.value("rp_matrices", std::uint64_t{0});
    r.parameters.gram_matrices = p.value("gram_matrices", std::uint64_t{0});
    r.parameters.rp_prototypes = p.value("rp_prototypes", std::uint64_t{0});
    r.parameters.projections = p.value("projections", std::uint64_t{0});
    r.parameters.classifier_rp = p.value("classifier_rp", std::uint64_t{0});
    r.parameters.classifier_weights = p.value("classifier_weights", std::uint64_t{0});
  }
  return r;
}

void write_report(const std::filesystem::path& path, const RunReport& report) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
  out << to_json(report).dump(2) << '\n';
}

RunReport read_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
  try {
    return report_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse_error, path.string() + ": " + e.what());
  } catch (const Error& e) {
    throw Error(Errc::parse_error, path.string() + ": " + e.what());
  }
}

std::string csv_header() { return "label,method,stream_seed,num_tasks,a_avg,a_last,parameters"; }

std::string csv_row(const RunReport& r) {
  std::ostringstream os;
  os.precision(10);
  os << r.label << ',' << to_string(r.config.method) << ',' << r.stream_seed << ',' << r.num_tasks() << ','
     << r.a_avg << ',' << r.a_last << ',' << r.parameters.total();
  return os.str();
}

}  // namespace anacp
