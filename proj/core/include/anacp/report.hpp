#pragma once

#include "anacp/feature_store.hpp"
#include "anacp/learner.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace anacp {

/// Result of running one learner over one task stream. Accuracies are in
/// percent. acc_cil[t][i] / acc_til[t][i] is the accuracy on task i's test
/// split after learning task t (only i <= t is filled; the rest is NaN).
struct RunReport {
  LearnerConfig config;
  std::uint64_t stream_seed = 0;
  std::vector<std::vector<ClassId>> task_classes;
  Matrix acc_cil;
  Matrix acc_til;
  std::vector<double> cumulative_accuracy;  // A_t over the union of test splits 0..t
  double a_last = 0.0;
  double a_avg = 0.0;
  std::vector<double> task_seconds;
  std::vector<TaskDiagnostics> diagnostics;
  ParameterCount parameters;
  std::string label;

  std::size_t num_tasks() const { return task_classes.size(); }
};

/// Runs the stream task by task, evaluating after each one on every test
/// split seen so far, in both CIL and TIL mode.
RunReport run_stream(const LearnerConfig& config, const TaskStream& stream);

/// (1/T) sum_t A_t.
double average_incremental_accuracy(std::span<const double> per_task);

/// (ai - a0) / (100 - a0) * 100.
double rel_error_reduction(double a0, double ai);

/// Largest |A[t][i] - A[i][i]| over all filled entries, in points.
double max_column_drift(const Matrix& acc);

double accuracy_percent(std::span<const ClassId> predicted, std::span<const ClassId> truth);

nlohmann::ordered_json to_json(const RunReport& report);
RunReport report_from_json(const nlohmann::json& j);

void write_report(const std::filesystem::path& path, const RunReport& report);
/// Errc::parse_error naming the file on malformed input.
RunReport read_report(const std::filesystem::path& path);

std::string csv_header();
std::string csv_row(const RunReport& report);

}  // namespace anacp
