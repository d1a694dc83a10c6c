#include "deepdisagg/cli.hpp"

#include "deepdisagg/data_pipeline.hpp"
#include "deepdisagg/deep_exact.hpp"
#include "deepdisagg/deep_greedy.hpp"
#include "deepdisagg/disaggregator.hpp"
#include "deepdisagg/metrics.hpp"
#include "deepdisagg/model_io.hpp"
#include "deepdisagg/shallow_sc.hpp"
#include "deepdisagg/svg_plot.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

namespace deepdisagg {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// DEEP_DISAGG_LOG: 0 silent, 1 progress (default), 2 per-iteration traces.
int log_level() {
  const char* env = std::getenv("DEEP_DISAGG_LOG");
  if (env == nullptr || *env == '\0') return 1;
  return std::atoi(env);
}

class Logger {
 public:
  explicit Logger(std::ostream& err) : err_(err), level_(log_level()) {}
  void info(const std::string& msg) { emit(1, msg); }
  void trace(const std::string& msg) { emit(2, msg); }

 private:
  void emit(int level, const std::string& msg) {
    if (level_ < level) return;
    std::lock_guard lock(mu_);
    err_ << "[deep_disagg] " << msg << '\n';
  }
  std::ostream& err_;
  int level_;
  std::mutex mu_;
};

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string format_double(double v) {
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  return ss.str();
}

struct Manifest {
  std::string command;
  std::vector<std::string> argv;
  json config = json::object();
  std::uint64_t seed = 0;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
};

void write_manifest(const fs::path& out_dir, Manifest manifest, std::chrono::steady_clock::time_point start) {
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  for (const auto& file : manifest.outputs) {
    if (!fs::exists(out_dir / file)) throw std::runtime_error("expected output missing: " + file);
  }
  json doc{{"command", manifest.command},
           {"argv", manifest.argv},
           {"config", manifest.config},
           {"seed", manifest.seed},
           {"inputs", manifest.inputs},
           {"outputs", manifest.outputs},
           {"wall_clock_seconds", seconds},
           {"library_version", kVersion}};
  write_file_atomic(out_dir / "manifest.json", doc.dump(2) + "\n");
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads; rethrows the first failure.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, jobs));
  if (workers == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, n); ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

CsvSchema schema_for(const std::string& missing, bool clamp_negative) {
  CsvSchema schema;
  if (missing == "drop") {
    schema.missing = MissingPolicy::drop_row;
  } else if (missing == "zero") {
    schema.missing = MissingPolicy::zero_fill;
  } else {
    throw std::invalid_argument("--missing must be 'drop' or 'zero'");
  }
  schema.negative = clamp_negative ? NegativePolicy::clamp : NegativePolicy::reject;
  return schema;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  SynthConfig cfg;
  std::string out;
};

void cmd_synth(const SynthArgs& a, Manifest& manifest, Logger& log) {
  const fs::path out_dir(a.out);
  const auto data = synth_generate(a.cfg);
  for (const auto& home : data.homes) {
    std::ostringstream csv;
    write_csv(csv, home);
    const std::string name = home.home_id + ".csv";
    write_file_atomic(out_dir / name, csv.str());
    manifest.outputs.push_back(name);
  }
  for (const auto& model : data.models) {
    const std::string name = "truth_models/" + model.appliance_id + ".json";
    save_model(model, out_dir / name);
    manifest.outputs.push_back(name);
  }
  log.info("synth: wrote " + std::to_string(data.homes.size()) + " homes and " +
           std::to_string(data.models.size()) + " generating models to " + a.out);
  manifest.seed = a.cfg.seed;
  manifest.config = json{{"n_appliances", a.cfg.n_appliances}, {"layer_widths", a.cfg.layer_widths},
                         {"window_length", a.cfg.window_length}, {"windows", a.cfg.windows},
                         {"n_homes", a.cfg.n_homes}, {"test_windows", a.cfg.test_windows},
                         {"density", a.cfg.density}, {"noise_std", a.cfg.noise_std},
                         {"sample_period", a.cfg.sample_period}, {"dictionary_density", a.cfg.dictionary_density}};
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::vector<std::string> inputs;
  std::string solver = "exact";
  std::vector<Index> widths;
  double lambda = 1e-3;
  std::vector<double> mu;
  std::optional<int> iters;
  int greedy_iters = 20;
  std::string init = "from_greedy";
  double tol = 1e-6;
  int ista_iters = 300;
  double ista_tol = 1e-6;
  Index window = 144;
  std::int64_t resample = 0;
  std::vector<std::string> appliances;
  std::string missing = "drop";
  bool clamp_negative = false;
  bool signed_codes = false;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string out;
};

int default_iters(const std::string& solver) {
  if (solver == "shallow") return 30;
  if (solver == "greedy") return 20;
  return 200;
}

struct TrainOutput {
  ApplianceModel model;
  std::string trace_csv;
};

TrainOutput train_one(const std::string& id, const Matrix& X, const TrainArgs& a, Logger& log) {
  const int iters = a.iters.value_or(default_iters(a.solver));
  IstaOptions ista;
  ista.max_iters = a.ista_iters;
  ista.tol = a.ista_tol;
  const bool nonneg = !a.signed_codes;

  TrainOutput out;
  out.model.appliance_id = id;
  auto& tc = out.model.training_config;
  tc.solver = a.solver;
  tc.lambda = a.lambda;
  tc.outer_iters = iters;
  tc.ista_iters = a.ista_iters;
  tc.ista_tol = a.ista_tol;
  tc.nonneg = nonneg;
  tc.seed = a.seed;

  std::ostringstream trace;
  trace.precision(17);
  auto write_half_steps = [&](const std::vector<HalfStep>& steps) {
    trace << "layer,iteration,step,objective_before,objective_after,fidelity_before,fidelity_after\n";
    for (const auto& s : steps) {
      trace << s.layer + 1 << ',' << s.iteration + 1 << ',' << to_string(s.kind) << ',' << s.objective_before << ','
            << s.objective_after << ',' << s.fidelity_before << ',' << s.fidelity_after << '\n';
    }
  };

  if (a.solver == "shallow") {
    if (a.widths.size() != 1) throw std::invalid_argument("--solver shallow takes a single width");
    ShallowConfig cfg;
    cfg.n_atoms = a.widths.front();
    cfg.lambda = a.lambda;
    cfg.outer_iters = iters;
    cfg.nonneg_codes = nonneg;
    cfg.seed = a.seed;
    cfg.ista = ista;
    auto fit = learn_shallow(X, cfg);
    write_half_steps(fit.trace);
    out.model.dictionary = DeepDictionary({std::move(fit.dictionary)});
  } else if (a.solver == "greedy") {
    GreedyConfig cfg;
    cfg.layer_widths = a.widths;
    cfg.lambda = a.lambda;
    cfg.per_layer_iters = iters;
    cfg.nonneg_final = nonneg;
    cfg.seed = a.seed;
    cfg.ista = ista;
    auto fit = train_greedy(X, cfg);
    write_half_steps(fit.trace);
    out.model.dictionary = std::move(fit.dictionary);
  } else if (a.solver == "exact") {
    ExactConfig cfg;
    cfg.layer_widths = a.widths;
    cfg.lambda = a.lambda;
    cfg.mu = a.mu;
    cfg.max_iters = iters;
    cfg.tol = a.tol;
    cfg.nonneg_final = nonneg;
    cfg.seed = a.seed;
    cfg.init = parse_exact_init(a.init);
    cfg.greedy_iters = a.greedy_iters;
    cfg.ista = ista;
    auto fit = train_exact(X, cfg);
    write_trace_csv(trace, fit.trace);
    tc.mu = resolved_mu(cfg);
    tc.tol = a.tol;
    tc.greedy_iters = a.greedy_iters;
    tc.init = std::string(to_string(cfg.init));
    if (log_level() >= 2) {
      for (const auto& row : fit.trace) {
        log.trace(id + " iter " + std::to_string(row.iteration) + " objective " + format_double(row.objective));
      }
    }
    log.info(id + ": exact objective " + format_double(fit.initial_objective) + " -> " +
             format_double(fit.best_objective) + " (" + std::to_string(fit.trace.size()) + " iterations)");
    out.model.dictionary = std::move(fit.dictionary);
  } else {
    throw std::invalid_argument("unknown solver '" + a.solver + "' (expected shallow, greedy or exact)");
  }

  const auto problems = validate(out.model);
  if (!problems.empty()) throw std::runtime_error("trained model for '" + id + "' is invalid: " + join(problems, "; "));
  out.trace_csv = trace.str();
  return out;
}

void cmd_train(const TrainArgs& a, Manifest& manifest, Logger& log) {
  if (a.widths.empty()) throw std::invalid_argument("--widths is required");
  const CsvSchema schema = schema_for(a.missing, a.clamp_negative);
  const std::set<std::string> wanted(a.appliances.begin(), a.appliances.end());

  std::map<std::string, std::vector<SignalMatrix>> windows;
  for (const auto& path : a.inputs) {
    const auto home = load_csv(path, schema);
    for (const auto& [id, series] : home.appliance_series) {
      if (!wanted.empty() && !wanted.count(id)) continue;
      const auto& source = a.resample > 0 ? resample_mean(series, a.resample) : series;
      windows[id].push_back(windowize(source, a.window));
    }
    manifest.inputs.push_back(path);
  }
  if (windows.empty()) throw std::invalid_argument("no appliance columns found in the training data");

  std::vector<std::string> ids;
  std::vector<Matrix> data;
  for (auto& [id, parts] : windows) {
    ids.push_back(id);
    data.push_back(concat_windows(parts).data);
  }

  std::vector<TrainOutput> results(ids.size());
  parallel_for(ids.size(), a.jobs, [&](std::size_t i) {
    log.info("training '" + ids[i] + "' on " + std::to_string(data[i].cols()) + " windows");
    results[i] = train_one(ids[i], data[i], a, log);
  });

  const fs::path out_dir(a.out);
  for (const auto& r : results) {
    const std::string model_name = r.model.appliance_id + ".json";
    const std::string trace_name = r.model.appliance_id + "_trace.csv";
    save_model(r.model, out_dir / model_name);
    write_file_atomic(out_dir / trace_name, r.trace_csv);
    manifest.outputs.push_back(model_name);
    manifest.outputs.push_back(trace_name);
  }
  manifest.seed = a.seed;
  manifest.config = json{{"solver", a.solver},         {"widths", a.widths},
                         {"lambda", a.lambda},         {"mu", a.mu},
                         {"iters", a.iters.value_or(default_iters(a.solver))},
                         {"greedy_iters", a.greedy_iters}, {"init", a.init},
                         {"tol", a.tol},               {"ista_iters", a.ista_iters},
                         {"ista_tol", a.ista_tol},     {"window", a.window},
                         {"resample", a.resample},     {"appliances", a.appliances},
                         {"missing", a.missing},       {"clamp_negative", a.clamp_negative},
                         {"signed_codes", a.signed_codes}, {"jobs", a.jobs}};
}

// ---------------------------------------------------------------- disaggregate

struct DisaggArgs {
  std::vector<std::string> models;
  std::string input;
  double lambda = 1e-3;
  int ista_iters = 1000;
  double ista_tol = 1e-9;
  bool no_renormalize = false;
  std::int64_t resample = 0;
  std::string missing = "drop";
  bool clamp_negative = false;
  std::string out;
};

std::vector<fs::path> expand_model_paths(const std::vector<std::string>& entries) {
  std::vector<fs::path> paths;
  for (const auto& entry : entries) {
    if (fs::is_directory(entry)) {
      std::vector<fs::path> found;
      for (const auto& f : fs::directory_iterator(entry)) {
        if (f.path().extension() == ".json" && f.path().filename() != "manifest.json") found.push_back(f.path());
      }
      std::sort(found.begin(), found.end());
      paths.insert(paths.end(), found.begin(), found.end());
    } else {
      paths.emplace_back(entry);
    }
  }
  if (paths.empty()) throw std::invalid_argument("no model files given");
  return paths;
}

void cmd_disaggregate(const DisaggArgs& a, Manifest& manifest, Logger& log) {
  std::vector<ApplianceModel> models;
  for (const auto& path : expand_model_paths(a.models)) {
    models.push_back(load_model(path));
    const auto problems = validate(models.back());
    if (!problems.empty()) throw std::invalid_argument(path.string() + ": " + join(problems, "; "));
    if (models.back().appliance_id == "residual" || models.back().appliance_id == kAggregateColumn) {
      throw std::invalid_argument(path.string() + ": appliance id '" + models.back().appliance_id + "' is reserved");
    }
    manifest.inputs.push_back(path.string());
  }
  const Index m = models.front().dictionary.window_length();
  for (const auto& model : models) {
    if (model.dictionary.window_length() != m) {
      throw std::invalid_argument("model/window mismatch: '" + model.appliance_id + "' expects windows of " +
                                  std::to_string(model.dictionary.window_length()) + " samples, '" +
                                  models.front().appliance_id + "' expects " + std::to_string(m));
    }
  }

  auto home = load_csv(a.input, schema_for(a.missing, a.clamp_negative));
  manifest.inputs.push_back(a.input);
  if (!home.aggregate_series) throw std::invalid_argument(a.input + ": no aggregate column and no appliance columns");
  EnergySeries aggregate = *home.aggregate_series;
  if (a.resample > 0) aggregate = resample_mean(aggregate, a.resample);
  const SignalMatrix agg = windowize(aggregate, m);

  DisaggConfig cfg;
  cfg.lambda = a.lambda;
  cfg.ista.max_iters = a.ista_iters;
  cfg.ista.tol = a.ista_tol;
  cfg.renormalize_effective = !a.no_renormalize;
  const auto result = disaggregate(agg, models, cfg);
  log.info("disaggregated " + std::to_string(agg.n_windows()) + " windows; residual norm " +
           format_double(result.residual));

  std::ostringstream csv;
  csv << "timestamp";
  for (const auto& [id, est] : result.per_appliance_estimate) csv << ',' << id;
  csv << ",residual," << kAggregateColumn << '\n';
  csv.precision(17);
  for (Index j = 0; j < agg.n_windows(); ++j) {
    for (Index i = 0; i < m; ++i) {
      csv << aggregate.timestamps[static_cast<std::size_t>(j * m + i)];
      for (const auto& [id, est] : result.per_appliance_estimate) csv << ',' << est.data(i, j);
      csv << ',' << result.residual_matrix(i, j) << ',' << agg.data(i, j) << '\n';
    }
  }
  write_file_atomic(fs::path(a.out) / "estimates.csv", csv.str());
  manifest.outputs.push_back("estimates.csv");
  manifest.config = json{{"lambda", a.lambda},         {"ista_iters", a.ista_iters},
                         {"ista_tol", a.ista_tol},     {"renormalize_effective", !a.no_renormalize},
                         {"resample", a.resample},     {"window", m},
                         {"missing", a.missing},       {"clamp_negative", a.clamp_negative}};
}

// ---------------------------------------------------------------- evaluate

struct EvalArgs {
  std::string truth;
  std::string estimates;
  bool plot = false;
  std::string out;
};

void cmd_evaluate(const EvalArgs& a, Manifest& manifest, Logger& log) {
  CsvSchema schema;
  schema.synthesize_aggregate = false;
  const auto truth = load_csv(a.truth, schema);
  // The residual column is signed; it is read but not scored.
  CsvSchema est_schema = schema;
  est_schema.negative = NegativePolicy::allow;
  const auto est = load_csv(a.estimates, est_schema);
  manifest.inputs = {a.truth, a.estimates};

  std::map<std::int64_t, std::size_t> truth_index;
  if (truth.appliance_series.empty()) throw std::invalid_argument(a.truth + ": no appliance columns");
  const auto& truth_ts = truth.appliance_series.begin()->second.timestamps;
  for (std::size_t t = 0; t < truth_ts.size(); ++t) truth_index[truth_ts[t]] = t;

  ApplianceSignals truth_m;
  ApplianceSignals est_m;
  for (const auto& [id, series] : est.appliance_series) {
    if (id == "residual") continue;
    auto it = truth.appliance_series.find(id);
    if (it == truth.appliance_series.end()) throw std::invalid_argument("misaligned inputs: no truth for '" + id + "'");
    Matrix t_row(1, static_cast<Index>(series.size()));
    Matrix e_row(1, static_cast<Index>(series.size()));
    for (std::size_t k = 0; k < series.size(); ++k) {
      auto pos = truth_index.find(series.timestamps[k]);
      if (pos == truth_index.end()) {
        throw std::invalid_argument("misaligned inputs: timestamp " + std::to_string(series.timestamps[k]) +
                                    " missing from truth");
      }
      t_row(0, static_cast<Index>(k)) = it->second.values[pos->second];
      e_row(0, static_cast<Index>(k)) = series.values[k];
    }
    truth_m.emplace(id, std::move(t_row));
    est_m.emplace(id, std::move(e_row));
  }
  if (est_m.empty()) throw std::invalid_argument(a.estimates + ": no appliance estimate columns");
  for (const auto& [id, series] : truth.appliance_series) {
    if (!est_m.count(id)) throw std::invalid_argument("misaligned inputs: no estimate for '" + id + "'");
  }

  const auto report = evaluate(truth_m, est_m);
  log.info("accuracy " + format_double(report.accuracy));
  const fs::path out_dir(a.out);
  std::ostringstream js;
  write_report_json(js, report);
  write_file_atomic(out_dir / "report.json", js.str());
  std::ostringstream cs;
  write_report_csv(cs, report);
  write_file_atomic(out_dir / "report.csv", cs.str());
  manifest.outputs = {"report.json", "report.csv"};

  if (a.plot) {
    for (const auto& [id, t] : truth_m) {
      const auto& e = est_m.at(id);
      const std::vector<double> tv(t.data(), t.data() + t.size());
      const std::vector<double> ev(e.data(), e.data() + e.size());
      const std::string name = "plots/" + id + ".svg";
      write_file_atomic(out_dir / name, truth_vs_estimate_svg(id, tv, ev));
      manifest.outputs.push_back(name);
    }
  }
  manifest.config = json{{"plot", a.plot}};
}

std::string error_record(const std::string& command, const std::string& message) {
  return json{{"status", "error"}, {"command", command}, {"error", message}}.dump();
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Deep sparse coding energy disaggregation", "deep_disagg"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a seeded synthetic dataset and its generating models");
  synth_cmd->add_option("--appliances", synth.cfg.n_appliances, "Number of appliances")->capture_default_str();
  synth_cmd->add_option("--widths", synth.cfg.layer_widths, "Layer widths, e.g. 24,12")
      ->delimiter(',')
      ->capture_default_str();
  synth_cmd->add_option("--window", synth.cfg.window_length, "Samples per window (m)")->capture_default_str();
  synth_cmd->add_option("--windows", synth.cfg.windows, "Windows per appliance in each home")->capture_default_str();
  synth_cmd->add_option("--homes", synth.cfg.n_homes, "Number of training homes")->capture_default_str();
  synth_cmd->add_option("--test-windows", synth.cfg.test_windows, "Windows in the extra 'test' home (0: none)")
      ->capture_default_str();
  synth_cmd->add_option("--density", synth.cfg.density, "Code density in (0, 1]")->capture_default_str();
  synth_cmd->add_option("--dict-density", synth.cfg.dictionary_density, "Dictionary density in (0, 1]")
      ->capture_default_str();
  synth_cmd->add_option("--noise", synth.cfg.noise_std, "Gaussian noise standard deviation")->capture_default_str();
  synth_cmd->add_option("--period", synth.cfg.sample_period, "Sampling period in seconds")->capture_default_str();
  synth_cmd->add_option("--seed", synth.cfg.seed, "RNG seed")->capture_default_str();
  synth_cmd->add_option("--out", synth.out, "Output directory")->required();

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Learn one deep dictionary per appliance");
  train_cmd->add_option("--input", train.inputs, "Training CSV files (one per home)")->required()->expected(1, -1);
  train_cmd->add_option("--solver", train.solver, "shallow | greedy | exact")
      ->check(CLI::IsMember({"shallow", "greedy", "exact"}))
      ->capture_default_str();
  train_cmd->add_option("--widths", train.widths, "Layer widths, e.g. 144,100,80")->delimiter(',')->required();
  train_cmd->add_option("--lambda", train.lambda, "l1 weight on the final code")->capture_default_str();
  train_cmd->add_option("--mu", train.mu, "Coupling weights mu_1..mu_{N-1} (exact; default all 1)")->delimiter(',');
  train_cmd->add_option("--iters", train.iters,
                        "Outer iterations: shallow alternations (30), greedy per-layer alternations (20), "
                        "exact Split Bregman iterations (200)");
  train_cmd->add_option("--greedy-iters", train.greedy_iters, "Greedy alternations for the exact warm start")
      ->capture_default_str();
  train_cmd->add_option("--init", train.init, "Exact solver start: from_greedy | random")->capture_default_str();
  train_cmd->add_option("--tol", train.tol, "Relative objective change for exact convergence")->capture_default_str();
  train_cmd->add_option("--ista-iters", train.ista_iters, "ISTA iteration cap")->capture_default_str();
  train_cmd->add_option("--ista-tol", train.ista_tol, "ISTA relative objective tolerance")->capture_default_str();
  train_cmd->add_option("--window", train.window, "Samples per window (m)")->capture_default_str();
  train_cmd->add_option("--resample", train.resample, "Average to this many seconds first (0: off)")
      ->capture_default_str();
  train_cmd->add_option("--appliances", train.appliances, "Only train these appliance columns")->delimiter(',');
  train_cmd->add_option("--missing", train.missing, "Missing values: drop | zero")->capture_default_str();
  train_cmd->add_flag("--clamp-negative", train.clamp_negative, "Clamp negative readings to 0 instead of failing");
  train_cmd->add_flag("--signed-codes", train.signed_codes, "Do not constrain the final code to be non-negative");
  train_cmd->add_option("--seed", train.seed, "RNG seed")->capture_default_str();
  train_cmd->add_option("--jobs", train.jobs, "Appliances trained in parallel")->capture_default_str();
  train_cmd->add_option("--out", train.out, "Output directory")->required();

  DisaggArgs disagg;
  auto* disagg_cmd = app.add_subcommand("disaggregate", "Split an aggregate signal across trained appliance models");
  disagg_cmd->add_option("--models", disagg.models, "Model files or directories")->required()->expected(1, -1);
  disagg_cmd->add_option("--input", disagg.input, "CSV with an aggregate column (or appliance columns to sum)")
      ->required();
  disagg_cmd->add_option("--lambda", disagg.lambda, "l1 weight of the joint coding problem")->capture_default_str();
  disagg_cmd->add_option("--ista-iters", disagg.ista_iters, "ISTA iteration cap")->capture_default_str();
  disagg_cmd->add_option("--ista-tol", disagg.ista_tol, "ISTA relative objective tolerance")->capture_default_str();
  disagg_cmd->add_flag("--no-renormalize", disagg.no_renormalize, "Use raw effective dictionaries");
  disagg_cmd->add_option("--resample", disagg.resample, "Average to this many seconds first (0: off)")
      ->capture_default_str();
  disagg_cmd->add_option("--missing", disagg.missing, "Missing values: drop | zero")->capture_default_str();
  disagg_cmd->add_flag("--clamp-negative", disagg.clamp_negative, "Clamp negative readings to 0");
  disagg_cmd->add_option("--out", disagg.out, "Output directory")->required();

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("evaluate", "Score estimates against ground truth");
  eval_cmd->add_option("--truth", eval.truth, "CSV with true per-appliance columns")->required();
  eval_cmd->add_option("--estimates", eval.estimates, "CSV written by disaggregate")->required();
  eval_cmd->add_flag("--plot", eval.plot, "Write per-appliance SVG plots");
  eval_cmd->add_option("--out", eval.out, "Output directory")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code != 0) err << error_record(args.empty() ? "" : args.front(), e.what()) << '\n';
    return code;
  }

  Logger log(err);
  Manifest manifest;
  manifest.argv = args;
  const auto start = std::chrono::steady_clock::now();
  std::string out_dir;
  try {
    if (synth_cmd->parsed()) {
      manifest.command = "synth";
      out_dir = synth.out;
      cmd_synth(synth, manifest, log);
    } else if (train_cmd->parsed()) {
      manifest.command = "train";
      out_dir = train.out;
      cmd_train(train, manifest, log);
    } else if (disagg_cmd->parsed()) {
      manifest.command = "disaggregate";
      out_dir = disagg.out;
      cmd_disaggregate(disagg, manifest, log);
    } else {
      manifest.command = "evaluate";
      out_dir = eval.out;
      cmd_evaluate(eval, manifest, log);
    }
    write_manifest(out_dir, manifest, start);
  } catch (const std::exception& e) {
    err << error_record(manifest.command, e.what()) << '\n';
    return 1;
  }
  return 0;
}

}  // namespace deepdisagg
