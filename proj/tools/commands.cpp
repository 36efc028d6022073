#include "commands.hpp"

#include "anacp/error.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace anacp::cli {

namespace fs = std::filesystem;

namespace {

CovarianceKind parse_covariance(const std::string& name) {
  if (name == "identity") return CovarianceKind::identity;
  if (name == "spd" || name == "random_spd") return CovarianceKind::random_spd;
  throw Error(Errc::invalid_argument, "unknown covariance kind '" + name + "' (expected identity or spd)");
}

bool parse_on_off(const std::string& value) {
  if (value == "on" || value == "1" || value == "true") return true;
  if (value == "off" || value == "0" || value == "false") return false;
  throw Error(Errc::invalid_argument, "expected on/off, got '" + value + "'");
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used == value.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(Errc::invalid_argument, "bad numeric value '" + value + "' for " + key);
}

int parse_int(const std::string& key, const std::string& value) {
  const double v = parse_double(key, value);
  if (v != std::floor(v)) throw Error(Errc::invalid_argument, key + " must be an integer, got " + value);
  return static_cast<int>(v);
}

int worker_count(int requested, std::size_t jobs) {
  int n = requested;
  if (n <= 0) {
    if (const char* env = std::getenv("ANACP_THREADS")) n = std::atoi(env);
  }
  if (n <= 0) n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return std::max(1, std::min<int>(n, static_cast<int>(jobs)));
}

struct Summary {
  double mean = 0.0;
  double stddev = 0.0;
};

Summary summarize(const std::vector<double>& values) {
  Summary s;
  if (values.empty()) return s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(sq / static_cast<double>(values.size() - 1));
  }
  return s;
}

SynthSpec synth_from_json(const nlohmann::json& j, SynthSpec s) {
  if (j.contains("d")) s.dim = j["d"].get<int>();
  if (j.contains("classes")) s.num_classes = j["classes"].get<int>();
  if (j.contains("train_per_class")) s.train_per_class = j["train_per_class"].get<int>();
  if (j.contains("test_per_class")) s.test_per_class = j["test_per_class"].get<int>();
  if (j.contains("mean_scale")) s.mean_scale = j["mean_scale"].get<double>();
  if (j.contains("covariance")) s.covariance = parse_covariance(j["covariance"].get<std::string>());
  if (j.contains("kappa")) s.kappa = j["kappa"].get<double>();
  if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("clusters")) s.num_clusters = j["clusters"].get<int>();
  if (j.contains("cluster_spread")) s.cluster_spread = j["cluster_spread"].get<double>();
  return s;
}

void add_synth_flags(CLI::App* app, SynthSpec& spec, std::string& cov_name) {
  app->add_option("--d", spec.dim, "Feature dimension");
  app->add_option("--classes", spec.num_classes, "Number of classes");
  app->add_option("--train-per-class", spec.train_per_class, "Training samples per class");
  app->add_option("--test-per-class", spec.test_per_class, "Test samples per class");
  app->add_option("--mean-scale", spec.mean_scale, "Expected class-mean norm in noise units");
  app->add_option("--cov", cov_name, "Covariance kind: identity or spd");
  app->add_option("--kappa", spec.kappa, "Condition bound for --cov spd");
  app->add_option("--clusters", spec.num_clusters, "Group class means around this many centres (0 = off)");
  app->add_option("--cluster-spread", spec.cluster_spread, "Offset scale of class means within a cluster");
}

}  // namespace

void cmd_synth(const SynthOptions& options, std::ostream& log) {
  options.spec.validate();
  std::error_code ec;
  fs::create_directories(options.out_dir, ec);
  if (ec) throw Error(Errc::io_error, "cannot create " + options.out_dir.string() + ": " + ec.message());

  const SynthData data = generate_synthetic(options.spec);
  Manifest manifest;
  manifest.dataset = options.dataset_name;
  manifest.source_ptm = "synthetic-gaussian";
  manifest.preprocessing = "none";
  manifest.num_classes = data.train.num_classes;
  manifest.class_names = data.train.class_names;
  for (const auto& [split, set] : {std::pair{"train", &data.train}, std::pair{"test", &data.test}}) {
    const fs::path file = options.out_dir / (std::string(split) + ".feat");
    save_feature_file(file, *set);
    manifest.files.push_back({split, file.filename().string(), static_cast<std::uint32_t>(set->rows()),
                              static_cast<std::uint32_t>(set->dim()), file_checksum(file)});
    log << "wrote " << file.string() << " (" << set->rows() << " x " << set->dim() << ")\n";
  }
  save_manifest(options.out_dir / "manifest.json", manifest);
  log << "wrote " << (options.out_dir / "manifest.json").string() << '\n';
}

Sweep parse_sweep(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == text.size()) {
    throw Error(Errc::invalid_argument, "--ablate expects KEY=v1,v2,... (got '" + text + "')");
  }
  Sweep sweep;
  sweep.key = text.substr(0, eq);
  std::stringstream values(text.substr(eq + 1));
  for (std::string v; std::getline(values, v, ',');) {
    if (!v.empty()) sweep.values.push_back(v);
  }
  if (sweep.values.empty()) throw Error(Errc::invalid_argument, "--ablate has no values");
  LearnerConfig probe;
  for (const auto& v : sweep.values) apply_setting(probe, {sweep.key, v});
  return sweep;
}

void apply_setting(LearnerConfig& c, const Setting& s) {
  if (s.key == "H") c.heads = parse_int(s.key, s.value);
  else if (s.key == "D") c.rp_dim = parse_int(s.key, s.value);
  else if (s.key == "R") c.replay = parse_int(s.key, s.value);
  else if (s.key == "alpha") c.alpha = parse_double(s.key, s.value);
  else if (s.key == "lambda_cp") c.lambda_cp = parse_double(s.key, s.value);
  else if (s.key == "lambda_cls") c.lambda_cls = parse_double(s.key, s.value);
  else if (s.key == "NR") c.use_repulsion = parse_on_off(s.value);
  else if (s.key == "CLS") c.classifier = parse_classifier(s.value);
  else if (s.key == "method") c.method = parse_method(s.value);
  else throw Error(Errc::invalid_argument, "unknown ablation key '" + s.key + "' (use H, D, R, alpha, lambda_cp, lambda_cls, NR, CLS or method)");
}

void ExperimentConfig::validate() const {
  learner.validate();
  if (features && synth) throw Error(Errc::invalid_argument, "use either --features or --synth, not both");
  if (!features && !synth) throw Error(Errc::invalid_argument, "no data: pass --features DIR or --synth");
  if (synth) synth->validate();
  if (num_tasks < 1) throw Error(Errc::invalid_argument, "--tasks must be >= 1");
  if (reps < 1) throw Error(Errc::invalid_argument, "--reps must be >= 1");
  if (features) {
    for (const char* name : {"train.feat", "test.feat"}) {
      if (!fs::exists(*features / name)) {
        throw Error(Errc::io_error, "missing " + (*features / name).string() + " (run `anacp synth` or the extractor first)");
      }
    }
  }
  if (sweep) {
    LearnerConfig probe = learner;
    for (const auto& v : sweep->values) {
      apply_setting(probe, {sweep->key, v});
      probe.validate();
    }
  }
}

ExperimentConfig experiment_from_json(const nlohmann::json& j, ExperimentConfig c) {
  try {
    c.learner = config_from_json(j, c.learner);
    if (j.contains("tasks")) c.num_tasks = j["tasks"].get<int>();
    if (j.contains("reps")) c.reps = j["reps"].get<int>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("out")) c.out_dir = j["out"].get<std::string>();
    if (j.contains("features")) c.features = fs::path(j["features"].get<std::string>());
    if (j.contains("synth")) c.synth = synth_from_json(j["synth"], c.synth.value_or(SynthSpec{}));
    if (j.contains("ablate")) c.sweep = parse_sweep(j["ablate"].get<std::string>());
    if (j.contains("threads")) c.threads = j["threads"].get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse_error, std::string("experiment config: ") + e.what());
  }
  return c;
}

RunOutcome cmd_run(const ExperimentConfig& config, std::ostream& log) {
  config.validate();
  std::error_code ec;
  fs::create_directories(config.out_dir, ec);
  if (ec) throw Error(Errc::io_error, "cannot create " + config.out_dir.string() + ": " + ec.message());

  FeatureDataset train;
  FeatureDataset test;
  if (config.features) {
    train = load_feature_file(*config.features / "train.feat");
    test = load_feature_file(*config.features / "test.feat");
  } else {
    SynthData data = generate_synthetic(*config.synth);
    train = std::move(data.train);
    test = std::move(data.test);
  }

  struct Job {
    std::string setting;
    LearnerConfig learner;
    int rep = 0;
  };
  std::vector<Job> jobs;
  std::vector<std::string> settings;
  if (config.sweep) {
    for (const auto& v : config.sweep->values) {
      LearnerConfig learner = config.learner;
      apply_setting(learner, {config.sweep->key, v});
      settings.push_back(config.sweep->key + "=" + v);
      for (int r = 0; r < config.reps; ++r) jobs.push_back({settings.back(), learner, r});
    }
  } else {
    settings.push_back(std::string(to_string(config.learner.method)));
    for (int r = 0; r < config.reps; ++r) jobs.push_back({settings.back(), config.learner, r});
  }

  std::vector<std::optional<RunReport>> results(jobs.size());
  std::vector<std::string> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < jobs.size(); k = next++) {
      const Job& job = jobs[k];
      try {
        const TaskStream stream =
            make_task_stream(train, test, config.num_tasks, config.seed + static_cast<std::uint64_t>(job.rep));
        RunReport report = run_stream(job.learner, stream);
        report.label = job.setting;
        results[k] = std::move(report);
      } catch (const std::exception& e) {
        errors[k] = e.what();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const int workers = worker_count(config.threads, jobs.size());
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  RunOutcome outcome;
  std::ofstream runs(config.out_dir / "runs.csv", std::ios::trunc);
  runs << csv_header() << '\n';
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> per_setting;
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    const Job& job = jobs[k];
    std::string stem = job.setting;
    std::replace(stem.begin(), stem.end(), '=', '-');
    if (!results[k]) {
      outcome.failures.push_back(job.setting + " rep " + std::to_string(job.rep) + ": " + errors[k]);
      log << "FAILED " << outcome.failures.back() << '\n';
      continue;
    }
    const fs::path path = config.out_dir / (stem + "_rep" + std::to_string(job.rep) + ".json");
    write_report(path, *results[k]);
    outcome.reports.push_back(path);
    runs << csv_row(*results[k]) << '\n';
    per_setting[job.setting].first.push_back(results[k]->a_avg);
    per_setting[job.setting].second.push_back(results[k]->a_last);
    log << job.setting << " rep " << job.rep << ": a_avg=" << std::fixed << std::setprecision(2)
        << results[k]->a_avg << " a_last=" << results[k]->a_last << " -> " << path.string() << '\n';
  }

  outcome.aggregate_csv = config.out_dir / "aggregate.csv";
  std::ofstream agg(outcome.aggregate_csv, std::ios::trunc);
  agg << "setting,method,reps,a_avg_mean,a_avg_std,a_last_mean,a_last_std\n";
  agg << std::setprecision(6) << std::fixed;
  for (const auto& setting : settings) {
    const auto it = per_setting.find(setting);
    if (it == per_setting.end()) continue;
    const Summary avg = summarize(it->second.first);
    const Summary last = summarize(it->second.second);
    LearnerConfig learner = config.learner;
    if (config.sweep) apply_setting(learner, {config.sweep->key, setting.substr(config.sweep->key.size() + 1)});
    agg << setting << ',' << to_string(learner.method) << ',' << it->second.first.size() << ',' << avg.mean << ','
        << avg.stddev << ',' << last.mean << ',' << last.stddev << '\n';
  }
  return outcome;
}

std::string cmd_report(const std::vector<fs::path>& paths, const std::optional<fs::path>& csv_out) {
  if (paths.empty()) throw Error(Errc::invalid_argument, "report needs at least one report file");
  std::vector<std::pair<std::string, RunReport>> rows;
  for (const auto& p : paths) {
    RunReport r = read_report(p);
    rows.emplace_back(p.stem().string(), std::move(r));
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.second.a_last < b.second.a_last; });
  const bool with_rer = rows.size() >= 2;
  const double baseline = rows.front().second.a_last;

  std::ostringstream table;
  std::ostringstream csv;
  table << std::left << std::setw(32) << "report" << std::setw(20) << "method" << std::right << std::setw(10)
        << "a_avg" << std::setw(10) << "a_last";
  csv << "report,method,a_avg,a_last";
  if (with_rer) {
    table << std::setw(14) << "rel_err_red";
    csv << ",rel_error_reduction";
  }
  table << '\n';
  csv << '\n';
  table << std::fixed << std::setprecision(2);
  csv << std::fixed << std::setprecision(4);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& [name, r] = rows[i];
    table << std::left << std::setw(32) << name << std::setw(20) << to_string(r.config.method) << std::right
          << std::setw(10) << r.a_avg << std::setw(10) << r.a_last;
    csv << name << ',' << to_string(r.config.method) << ',' << r.a_avg << ',' << r.a_last;
    if (with_rer) {
      if (i == 0) {
        table << std::setw(14) << "-";
        csv << ',';
      } else {
        const double rer = rel_error_reduction(baseline, r.a_last);
        std::ostringstream cell;
        cell << std::fixed << std::setprecision(1) << rer << '%';
        table << std::setw(14) << cell.str();
        csv << ',' << rer;
      }
    }
    table << '\n';
    csv << '\n';
  }
  if (csv_out) {
    std::ofstream out(*csv_out, std::ios::trunc);
    if (!out) throw Error(Errc::io_error, "cannot write " + csv_out->string());
    out << csv.str();
  }
  return table.str();
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Analytic class-incremental learning: data generation, runs and reports"};
  app.require_subcommand(1);

  // synth
  SynthOptions synth;
  std::string synth_cov = "identity";
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic Gaussian-mixture feature dataset");
  add_synth_flags(synth_cmd, synth.spec, synth_cov);
  synth_cmd->add_option("--seed", synth.spec.seed, "Generator seed");
  synth_cmd->add_option("--out", synth.out_dir, "Output directory");
  synth_cmd->add_option("--name", synth.dataset_name, "Dataset name recorded in the manifest");

  // run
  ExperimentConfig exp;
  SynthSpec run_synth;
  std::string run_cov = "identity";
  std::string method = "anacp";
  std::string classifier = "elm";
  std::string metric = "euclidean";
  std::string ablate;
  std::string config_file;
  std::string features;
  bool use_synth = false;
  bool no_repulsion = false;
  auto* run_cmd = app.add_subcommand("run", "Run learners over a task stream and write reports");
  std::vector<CLI::Option*> learner_opts;
  auto* o_config = run_cmd->add_option("--config", config_file, "JSON config file (flags override it)");
  auto* o_features = run_cmd->add_option("--features", features, "Directory containing train.feat and test.feat");
  auto* o_synth = run_cmd->add_flag("--synth", use_synth, "Generate synthetic data in memory (see --d, --classes, ...)");
  add_synth_flags(run_cmd, run_synth, run_cov);
  auto* o_synth_seed = run_cmd->add_option("--synth-seed", run_synth.seed, "Synthetic generator seed");
  auto* o_tasks = run_cmd->add_option("--tasks", exp.num_tasks, "Number of tasks");
  auto* o_method = run_cmd->add_option("--method", method, "anacp | raw_ncm | incremental_ridge | rp_ridge");
  auto* o_heads = run_cmd->add_option("--heads", exp.learner.heads, "CP heads H");
  auto* o_rp = run_cmd->add_option("--rp-dim", exp.learner.rp_dim, "Random projection dimension D");
  auto* o_replay = run_cmd->add_option("--replay", exp.learner.replay, "Pseudo-replay samples per class R");
  auto* o_lcp = run_cmd->add_option("--lambda-cp", exp.learner.lambda_cp, "Ridge strength of the CP layer");
  auto* o_lcls = run_cmd->add_option("--lambda-cls", exp.learner.lambda_cls, "Ridge strength of the classifier");
  auto* o_alpha = run_cmd->add_option("--alpha", exp.learner.alpha, "Repulsion scale alpha");
  auto* o_nr = run_cmd->add_flag("--no-repulsion", no_repulsion, "Use raw class means as CP targets");
  auto* o_cls = run_cmd->add_option("--classifier", classifier, "ncm | elm");
  auto* o_metric = run_cmd->add_option("--ncm-metric", metric, "euclidean | cosine");
  auto* o_l2 = run_cmd->add_flag("--l2-normalize", exp.learner.l2_normalize, "L2-normalise input features");
  auto* o_model_seed = run_cmd->add_option("--model-seed", exp.learner.base_seed, "Seed for projections and replay");
  auto* o_seed = run_cmd->add_option("--seed", exp.seed, "Stream seed of the first repetition");
  auto* o_reps = run_cmd->add_option("--reps", exp.reps, "Repetitions (stream seeds seed..seed+reps-1)");
  auto* o_out = run_cmd->add_option("--out", exp.out_dir, "Output directory");
  auto* o_ablate = run_cmd->add_option("--ablate", ablate, "Sweep one knob, e.g. H=1,3,5 or NR=on,off");
  auto* o_threads = run_cmd->add_option("--threads", exp.threads, "Worker threads (default: ANACP_THREADS or all cores)");

  // report
  std::vector<std::string> report_paths;
  std::string report_csv;
  auto* report_cmd = app.add_subcommand("report", "Compare run reports");
  report_cmd->add_option("reports", report_paths, "Report JSON files")->required();
  auto* o_report_csv = report_cmd->add_option("--csv", report_csv, "Also write the table as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (synth_cmd->parsed()) {
      synth.spec.covariance = parse_covariance(synth_cov);
      cmd_synth(synth, out);
      return 0;
    }
    if (report_cmd->parsed()) {
      std::vector<fs::path> paths(report_paths.begin(), report_paths.end());
      out << cmd_report(paths, o_report_csv->count() ? std::optional<fs::path>(report_csv) : std::nullopt);
      return 0;
    }

    // Precedence: flags > config file > defaults.
    const ExperimentConfig flag_values = exp;
    ExperimentConfig effective;
    if (o_config->count()) {
      std::ifstream in(config_file);
      if (!in) throw Error(Errc::io_error, "cannot open config " + config_file);
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::parse_error, config_file + ": " + e.what());
      }
      effective = experiment_from_json(j);
    }
    auto& L = effective.learner;
    if (o_method->count()) L.method = parse_method(method);
    if (o_heads->count()) L.heads = flag_values.learner.heads;
    if (o_rp->count()) L.rp_dim = flag_values.learner.rp_dim;
    if (o_replay->count()) L.replay = flag_values.learner.replay;
    if (o_lcp->count()) L.lambda_cp = flag_values.learner.lambda_cp;
    if (o_lcls->count()) L.lambda_cls = flag_values.learner.lambda_cls;
    if (o_alpha->count()) L.alpha = flag_values.learner.alpha;
    if (o_nr->count()) L.use_repulsion = !no_repulsion;
    if (o_cls->count()) L.classifier = parse_classifier(classifier);
    if (o_metric->count()) L.metric = parse_metric(metric);
    if (o_l2->count()) L.l2_normalize = flag_values.learner.l2_normalize;
    if (o_model_seed->count()) L.base_seed = flag_values.learner.base_seed;
    if (o_tasks->count()) effective.num_tasks = flag_values.num_tasks;
    if (o_seed->count()) effective.seed = flag_values.seed;
    if (o_reps->count()) effective.reps = flag_values.reps;
    if (o_out->count()) effective.out_dir = flag_values.out_dir;
    if (o_threads->count()) effective.threads = flag_values.threads;
    if (o_ablate->count()) effective.sweep = parse_sweep(ablate);
    if (o_features->count()) {
      effective.features = fs::path(features);
      effective.synth.reset();
    }
    bool synth_flags = o_synth->count() > 0 || o_synth_seed->count() > 0;
    for (const char* name : {"--d", "--classes", "--train-per-class", "--test-per-class", "--mean-scale", "--cov",
                             "--kappa", "--clusters", "--cluster-spread"}) {
      synth_flags = synth_flags || run_cmd->get_option(name)->count() > 0;
    }
    if (synth_flags) {
      SynthSpec spec = effective.synth.value_or(SynthSpec{});
      auto take = [&](const char* name, auto& field, const auto& value) {
        if (run_cmd->get_option(name)->count()) field = value;
      };
      take("--d", spec.dim, run_synth.dim);
      take("--classes", spec.num_classes, run_synth.num_classes);
      take("--train-per-class", spec.train_per_class, run_synth.train_per_class);
      take("--test-per-class", spec.test_per_class, run_synth.test_per_class);
      take("--mean-scale", spec.mean_scale, run_synth.mean_scale);
      take("--kappa", spec.kappa, run_synth.kappa);
      take("--clusters", spec.num_clusters, run_synth.num_clusters);
      take("--cluster-spread", spec.cluster_spread, run_synth.cluster_spread);
      take("--synth-seed", spec.seed, run_synth.seed);
      if (run_cmd->get_option("--cov")->count()) spec.covariance = parse_covariance(run_cov);
      effective.synth = spec;
      if (!o_features->count()) effective.features.reset();
    }

    const RunOutcome outcome = cmd_run(effective, out);
    out << "aggregate: " << outcome.aggregate_csv.string() << '\n';
    if (!outcome.failures.empty()) {
      err << outcome.failures.size() << " run(s) failed:\n";
      for (const auto& f : outcome.failures) err << "  " << f << '\n';
      return 1;
    }
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace anacp::cli
