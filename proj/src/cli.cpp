#include "pfbo/cli.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "pfbo/bench.hpp"
#include "pfbo/bo.hpp"
#include "pfbo/config.hpp"
#include "pfbo/io.hpp"
#include "pfbo/kalman.hpp"
#include "pfbo/pfilter.hpp"
#include "pfbo/version.hpp"

namespace pfbo::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using io::format_double;

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Provenance record written next to every output. It is written once with
/// status "running" before the computation and rewritten when it finishes.
class RunManifest {
 public:
  RunManifest(std::string command, fs::path path, json config, std::uint64_t seed)
      : path_(std::move(path)) {
    doc_ = {{"command", std::move(command)},
            {"software", {{"name", "pfbo"}, {"version", kVersion}}},
            {"master_seed", seed},
            {"config", std::move(config)},
            {"started_at", utc_now()},
            {"finished_at", nullptr},
            {"status", "running"},
            {"outputs", json::array()}};
    flush();
  }

  void add_output(const fs::path& p) { doc_["outputs"].push_back(p.string()); }
  json& results() { return doc_["results"]; }

  void finish() {
    doc_["status"] = "complete";
    doc_["finished_at"] = utc_now();
    flush();
  }

 private:
  void flush() const { io::write_file_atomic(path_, doc_.dump(2) + "\n"); }

  fs::path path_;
  json doc_;
};

fs::path manifest_beside(const fs::path& out) {
  fs::path p = out;
  p += ".manifest.json";
  return p;
}

struct ModelFlags {
  double obs_var = LinearGaussianModel::kDefaultObsVar;
  double init_mean = LinearGaussianModel::kDefaultInitMean;
  double init_var = LinearGaussianModel::kDefaultInitVar;

  void add_to(CLI::App* app) {
    app->add_option("--obs-var", obs_var, "Observation noise variance")->capture_default_str();
    app->add_option("--init-mean", init_mean, "Mean of the x_0 prior")->capture_default_str();
    app->add_option("--init-var", init_var, "Variance of the x_0 prior")->capture_default_str();
  }
  LinearGaussianModel model(double tau2 = 0.0) const { return LinearGaussianModel(tau2, obs_var, init_mean, init_var); }
};

struct SimulateArgs {
  double tau2 = 0.012;
  ModelFlags model;
  std::size_t length = 500;
  std::uint64_t seed = 1;
  std::string out;
};

struct LoglikArgs {
  std::string series;
  double theta = 0.0;
  std::string engine = "kalman";
  ModelFlags model;
  std::size_t particles = 10000;
  std::uint64_t seed = 0;
  double ess_frac = 0.5;
  bool per_step = false;
  std::string manifest;
};

struct OptimizeArgs {
  std::string series;
  std::vector<double> bounds{0.005, 0.025};
  ModelFlags model;
  std::size_t particles = 1000;
  double sigma_f = 1.0;
  double sigma_n = 0.3;
  double length_scale = 0.2;
  double delta = 0.1;
  std::size_t iters = 30;
  std::uint64_t seed = 0;
  std::size_t normalizer_reps = 10;
  double ess_frac = 0.5;
  bool oracle = false;
  bool stop_on_convergence = false;
  std::string out;
};

struct ExperimentArgs {
  std::string config;
  std::string profile = "desk";
  std::string out;
  std::optional<std::size_t> replicates;
  std::optional<std::size_t> iterations;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  bool no_stats = false;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  const LinearGaussianModel model = a.model.model(a.tau2);
  const fs::path path = a.out;
  RunManifest manifest("simulate", manifest_beside(path),
                       {{"tau2", a.tau2}, {"model", config::to_json(model)}, {"length", a.length}, {"seed", a.seed},
                        {"out", a.out}},
                       a.seed);
  const TimeSeries series = simulate(model, a.length, a.seed);
  std::string csv = "y\n";
  for (double v : series.values()) csv += format_double(v) + "\n";
  io::write_file_atomic(path, csv);
  manifest.add_output(path);
  manifest.finish();
  out << "wrote " << series.length() << " observations to " << path.string() << "\n";
  return kSuccess;
}

int cmd_loglik(const LoglikArgs& a, std::ostream& out) {
  if (!(a.theta >= 0.0)) throw std::invalid_argument("--theta must be >= 0");
  const TimeSeries series = load_series(a.series);
  const LinearGaussianModel model = a.model.model();
  std::optional<RunManifest> manifest;
  if (!a.manifest.empty())
    manifest.emplace("loglik", a.manifest,
                     json{{"series", a.series},
                          {"theta", a.theta},
                          {"engine", a.engine},
                          {"model", config::to_json(model)},
                          {"particles", a.particles},
                          {"seed", a.seed},
                          {"ess_frac", a.ess_frac}},
                     a.seed);
  if (a.engine == "kalman") {
    const double ll = kalman_loglik(a.theta, series, model);
    out << format_double(ll) << "\n";
    if (manifest) manifest->results()["loglik"] = ll;
  } else {
    PFConfig cfg;
    cfg.particles = a.particles;
    cfg.seed = a.seed;
    cfg.ess_threshold_fraction = a.ess_frac;
    const PFResult r = pf_loglik(a.theta, series, model, cfg);
    out << format_double(r.loglik) << "\n";
    if (a.per_step) {
      out << "t,loglik\n";
      for (std::size_t t = 0; t < r.per_step_loglik.size(); ++t)
        out << t + 1 << ',' << format_double(r.per_step_loglik[t]) << "\n";
    }
    if (manifest) manifest->results()["loglik"] = r.loglik;
  }
  if (manifest) manifest->finish();
  return kSuccess;
}

std::string trace_csv(const BOTrace& trace) {
  std::ostringstream csv;
  csv << "t,x_evaluated,raw_value,std_value,kappa,incumbent_x,incumbent_mean\n";
  for (const BORecord& r : trace.records)
    csv << r.t << ',' << format_double(r.x_evaluated) << ',' << format_double(r.raw_value) << ','
        << format_double(r.std_value) << ',' << format_double(r.kappa) << ',' << format_double(r.incumbent_x) << ','
        << format_double(r.incumbent_mean) << '\n';
  return csv.str();
}

int cmd_optimize(const OptimizeArgs& a, std::ostream& out) {
  if (a.bounds.size() != 2) throw std::invalid_argument("--bounds takes two values: lo hi");
  if (!(a.bounds[0] >= 0.0)) throw std::invalid_argument("--bounds: lo must be >= 0");
  const TimeSeries series = load_series(a.series);
  const LinearGaussianModel model = a.model.model();

  BOConfig cfg;
  cfg.lo = a.bounds[0];
  cfg.hi = a.bounds[1];
  cfg.hp = {a.sigma_f, a.length_scale, a.sigma_n};
  cfg.delta = a.delta;
  cfg.max_iters = a.iters;
  cfg.seed = a.seed;
  cfg.normalizer_reps = a.normalizer_reps;
  cfg.stop_on_convergence = a.stop_on_convergence;
  if (cfg.lo < cfg.hi) cfg.init_points = BOConfig::equispaced(cfg.lo, cfg.hi, 5);
  cfg.validate();
  PFConfig pf;
  pf.particles = a.particles;
  pf.ess_threshold_fraction = a.ess_frac;
  pf.validate();

  json resolved = config::to_json(cfg);
  resolved["series"] = a.series;
  resolved["model"] = config::to_json(model);
  resolved["objective"] = a.oracle ? "kalman" : "particle_filter";
  resolved["particles"] = a.particles;
  resolved["ess_frac"] = a.ess_frac;
  resolved["out"] = a.out;
  const fs::path path = a.out;
  RunManifest manifest("optimize", manifest_beside(path), resolved, a.seed);

  NoisyObjective objective;
  Normalizer normalizer;
  if (a.oracle) {
    objective = [&](double theta, std::uint64_t) { return kalman_loglik(theta, series, model); };
    std::vector<double> values;
    for (double p : cfg.init_points) values.push_back(kalman_loglik(p, series, model));
    normalizer = normalizer_from_values(values);
  } else {
    objective = [&](double theta, std::uint64_t stream) {
      PFConfig c = pf;
      c.seed = stream;
      return pf_loglik(theta, series, model, c).loglik;
    };
    normalizer = build_normalizer(objective, cfg.init_points, cfg.normalizer_reps,
                                  derive_seed(cfg.seed, StreamPurpose::normalizer));
  }
  const BOTrace trace = bo_run(objective, cfg, normalizer);
  io::write_file_atomic(path, trace_csv(trace));

  const double theta_hat = trace.records.back().incumbent_x;
  const double ll_hat = kalman_loglik(theta_hat, series, model);
  const MLEResult mle = kalman_mle(series, cfg.lo, cfg.hi, model);
  manifest.add_output(path);
  manifest.results() = {{"normalizer", {{"mean", normalizer.mean}, {"scale", normalizer.scale}}},
                        {"theta_hat", theta_hat},
                        {"loglik_kf_theta_hat", ll_hat},
                        {"theta_star", mle.theta_star},
                        {"loglik_star", mle.loglik_star},
                        {"converged_at", trace.converged_at ? json(*trace.converged_at) : json(nullptr)}};
  manifest.finish();
  out << "theta_hat " << format_double(theta_hat) << "\n"
      << "loglik_kf " << format_double(ll_hat) << "\n"
      << "theta_star " << format_double(mle.theta_star) << "\n"
      << "converged_at " << (trace.converged_at ? std::to_string(*trace.converged_at) : "none") << "\n";
  return kSuccess;
}

int cmd_experiment(const ExperimentArgs& a, std::ostream& out) {
  bench::ExperimentConfig base;
  if (a.profile == "desk")
    base = bench::ExperimentConfig::desk();
  else if (a.profile == "paper")
    base = bench::ExperimentConfig::paper();
  else
    throw std::invalid_argument("--profile must be desk or paper");

  json raw;
  try {
    raw = json::parse(io::read_file(a.config));
  } catch (const json::parse_error& e) {
    throw config::ConfigError("/", std::string("invalid JSON: ") + e.what());
  }
  bench::ExperimentConfig cfg = config::experiment_from_json(raw, base);
  if (!a.out.empty()) cfg.output_dir = a.out;
  if (a.replicates) cfg.replicates = *a.replicates;
  if (a.iterations) cfg.iterations = *a.iterations;
  if (a.seed) cfg.master_seed = *a.seed;
  if (a.threads) cfg.threads = *a.threads;
  if (cfg.output_dir.empty()) throw config::ConfigError("/output_dir", "required field is missing (or pass --out)");
  cfg.validate();

  json resolved = config::to_json(cfg);
  resolved["profile"] = a.profile;
  RunManifest manifest("experiment", cfg.output_dir / "manifest.json", resolved, cfg.master_seed);
  const bench::ExperimentResult result = bench::run_experiment(cfg, !a.no_stats);
  bench::export_tables(result, cfg.output_dir);
  for (const char* f : {bench::ExportFiles::loglik_stats, bench::ExportFiles::mse_table, bench::ExportFiles::mse_curves,
                        bench::ExportFiles::posterior_snapshots, bench::ExportFiles::convergence,
                        bench::ExportFiles::traces})
    manifest.add_output(cfg.output_dir / f);
  json norms = json::array();
  for (std::size_t i = 0; i < result.normalizers.size(); ++i)
    norms.push_back({{"particles", cfg.particle_counts[i]},
                     {"mean", result.normalizers[i].mean},
                     {"scale", result.normalizers[i].scale}});
  manifest.results() = {{"theta_star", result.mle.theta_star},
                        {"loglik_star", result.mle.loglik_star},
                        {"normalizers", norms}};
  manifest.finish();
  out << "theta_star " << format_double(result.mle.theta_star) << "\n"
      << "loglik_star " << format_double(result.mle.loglik_star) << "\n"
      << "results in " << cfg.output_dir.string() << "\n";
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bayesian optimization of particle-filter log-likelihoods", "pfbo"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Simulate a random-walk-plus-noise series to CSV");
  s->add_option("--tau2", sim.tau2, "System noise variance")->capture_default_str()->check(CLI::NonNegativeNumber);
  sim.model.add_to(s);
  s->add_option("--length", sim.length, "Number of observations")->capture_default_str()->check(CLI::PositiveNumber);
  s->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
  s->add_option("--out", sim.out, "Output CSV path")->required();

  LoglikArgs ll;
  auto* l = app.add_subcommand("loglik", "Evaluate the log-likelihood at one parameter value");
  l->add_option("--series", ll.series, "Series CSV")->required();
  l->add_option("--theta", ll.theta, "System noise variance to evaluate")->required();
  l->add_option("--engine", ll.engine, "kalman or pf")->capture_default_str()->check(CLI::IsMember({"kalman", "pf"}));
  ll.model.add_to(l);
  l->add_option("--particles", ll.particles, "Particle count (pf)")->capture_default_str()->check(CLI::PositiveNumber);
  l->add_option("--seed", ll.seed, "Random seed (pf)")->capture_default_str();
  l->add_option("--ess-frac", ll.ess_frac, "Resample when ESS < frac * m (pf)")->capture_default_str();
  l->add_flag("--per-step", ll.per_step, "Also print per-step log predictive likelihoods (pf)");
  l->add_option("--manifest", ll.manifest, "Write a run manifest to this path");

  OptimizeArgs opt;
  auto* o = app.add_subcommand("optimize", "Run one Bayesian optimization and write its trace");
  o->add_option("--series", opt.series, "Series CSV")->required();
  o->add_option("--bounds", opt.bounds, "Search interval lo hi")->expected(2)->capture_default_str();
  opt.model.add_to(o);
  o->add_option("--particles", opt.particles, "Particle count")->capture_default_str()->check(CLI::PositiveNumber);
  o->add_option("--sigma-f", opt.sigma_f, "GP signal scale")->capture_default_str();
  o->add_option("--sigma-n", opt.sigma_n, "GP noise scale")->capture_default_str();
  o->add_option("--length-scale", opt.length_scale, "GP length scale (unit interval)")->capture_default_str();
  o->add_option("--delta", opt.delta, "UCB confidence parameter")->capture_default_str();
  o->add_option("--iters", opt.iters, "Acquisition iterations")->capture_default_str()->check(CLI::NonNegativeNumber);
  o->add_option("--seed", opt.seed, "Random seed")->capture_default_str();
  o->add_option("--normalizer-reps", opt.normalizer_reps, "Repetitions per init point for standardization")
      ->capture_default_str();
  o->add_option("--ess-frac", opt.ess_frac, "Resample when ESS < frac * m")->capture_default_str();
  o->add_flag("--oracle", opt.oracle, "Use the exact Kalman log-likelihood as objective");
  o->add_flag("--stop-on-convergence", opt.stop_on_convergence, "Stop once the convergence test passes");
  o->add_option("--out", opt.out, "Trace CSV path")->required();

  ExperimentArgs ex;
  auto* e = app.add_subcommand("experiment", "Run the Monte Carlo evaluation and export tables");
  e->add_option("--config", ex.config, "Experiment config JSON")->required()->check(CLI::ExistingFile);
  e->add_option("--profile", ex.profile, "desk or paper")->capture_default_str()->check(CLI::IsMember({"desk", "paper"}));
  e->add_option("--out", ex.out, "Output directory (overrides output_dir)");
  e->add_option("--replicates", ex.replicates, "Override replicate count")->check(CLI::PositiveNumber);
  e->add_option("--iters", ex.iterations, "Override iteration budget");
  e->add_option("--seed", ex.seed, "Override master seed");
  e->add_option("--threads", ex.threads, "Worker threads (0 = all cores)");
  e->add_flag("--no-stats", ex.no_stats, "Skip the log-likelihood statistics table");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& pe) {
    const int code = app.exit(pe, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }

  try {
    if (s->parsed()) return cmd_simulate(sim, out);
    if (l->parsed()) return cmd_loglik(ll, out);
    if (o->parsed()) return cmd_optimize(opt, out);
    if (e->parsed()) return cmd_experiment(ex, out);
  } catch (const std::invalid_argument& ia) {
    err << "error: " << ia.what() << "\n";
    return kUsageError;
  } catch (const std::exception& ex_) {
    err << "error: " << ex_.what() << "\n";
    return kRuntimeError;
  }
  return kUsageError;
}

}  // namespace pfbo::cli
