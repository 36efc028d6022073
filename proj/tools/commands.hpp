#pragma once

#include "anacp/feature_store.hpp"
#include "anacp/learner.hpp"
#include "anacp/report.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace anacp::cli {

/// Parses argv and dispatches to a subcommand. Returns the process exit code;
/// validation problems are printed to `err` and yield a non-zero code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

struct SynthOptions {
  SynthSpec spec;
  std::filesystem::path out_dir = "synth";
  std::string dataset_name = "synthetic";
};

/// Writes train.feat, test.feat and manifest.json into out_dir.
void cmd_synth(const SynthOptions& options, std::ostream& log);

/// One named value of a sweep ("H" -> "3").
struct Setting {
  std::string key;
  std::string value;
};

struct Sweep {
  std::string key;
  std::vector<std::string> values;
};

/// "H=1,3,5" -> {H, [1, 3, 5]}. Keys: H, D, R, alpha, lambda_cp, lambda_cls,
/// NR (on/off), CLS (ncm/elm), method.
Sweep parse_sweep(const std::string& text);
void apply_setting(LearnerConfig& config, const Setting& setting);

struct ExperimentConfig {
  LearnerConfig learner;
  std::optional<std::filesystem::path> features;  // directory with train.feat / test.feat
  std::optional<SynthSpec> synth;
  int num_tasks = 10;
  int reps = 1;
  std::uint64_t seed = 0;  // stream seed of repetition 0; repetition k uses seed + k
  std::filesystem::path out_dir = "runs";
  std::optional<Sweep> sweep;
  int threads = 0;  // 0 = ANACP_THREADS or hardware concurrency

  void validate() const;
};

/// Keys of the JSON config file: any LearnerConfig key plus tasks, reps,
/// seed, features, out, ablate and a "synth" object.
ExperimentConfig experiment_from_json(const nlohmann::json& j, ExperimentConfig base = {});

struct RunOutcome {
  std::vector<std::filesystem::path> reports;
  std::filesystem::path aggregate_csv;
  std::vector<std::string> failures;
};

/// Runs every (setting, repetition) pair, writes one JSON report per run,
/// runs.csv and aggregate.csv (mean and sample std of a_avg / a_last per setting).
RunOutcome cmd_run(const ExperimentConfig& config, std::ostream& log);

/// Comparison table sorted by a_last (ascending). With two or more reports a
/// relative error reduction column is added, measured against the lowest a_last.
std::string cmd_report(const std::vector<std::filesystem::path>& reports,
                       const std::optional<std::filesystem::path>& csv_out = std::nullopt);

}  // namespace anacp::cli
