#include "pfbo/bench.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "pfbo/io.hpp"
#include "pfbo/parallel.hpp"
#include "pfbo/pfilter.hpp"
#include "pfbo/rng.hpp"

namespace pfbo::bench {

namespace {

using io::format_double;

NoisyObjective pf_objective(const TimeSeries& series, const LinearGaussianModel& model_base, std::size_t particles,
                            double ess_fraction) {
  return [&series, model_base, particles, ess_fraction](double theta, std::uint64_t stream) {
    PFConfig cfg;
    cfg.particles = particles;
    cfg.ess_threshold_fraction = ess_fraction;
    cfg.seed = stream;
    return pf_loglik(theta, series, model_base, cfg).loglik;
  };
}

template <typename T>
void require_nonempty(const std::vector<T>& v, const char* name) {
  if (v.empty()) throw std::invalid_argument(std::string(name) + " must not be empty");
}

double log10_or_neg_inf(double v) { return v > 0.0 ? std::log10(v) : -std::numeric_limits<double>::infinity(); }

}  // namespace

void ExperimentConfig::validate() const {
  if (replicates < 1) throw std::invalid_argument("replicates must be >= 1");
  require_nonempty(particle_counts, "particle_counts");
  require_nonempty(sigma_n_grid, "sigma_n grid");
  require_nonempty(length_scale_grid, "length_scale grid");
  for (std::size_t m : particle_counts)
    if (m == 0) throw std::invalid_argument("particle counts must be >= 1");
  if (normalizer_reps < 2) throw std::invalid_argument("normalizer_reps must be >= 2");
  if (stats_replicates < 2) throw std::invalid_argument("stats_replicates must be >= 2");
  if (snapshot_grid < 2) throw std::invalid_argument("snapshot_grid must be >= 2");
  if (!series.file && series.length == 0) throw std::invalid_argument("series length must be >= 1");
  if (!series.file && !(series.tau2 >= 0.0)) throw std::invalid_argument("series tau2 must be >= 0");
  PFConfig{1, ess_threshold_fraction, 0}.validate();
  BOConfig probe = bo;
  for (double sn : sigma_n_grid) {
    for (double ls : length_scale_grid) {
      probe.hp.sigma_n = sn;
      probe.hp.length_scale = ls;
      probe.validate();
    }
  }
}

ExperimentConfig ExperimentConfig::desk() { return ExperimentConfig{}; }

ExperimentConfig ExperimentConfig::paper() {
  ExperimentConfig cfg;
  cfg.particle_counts = {1000, 10000, 100000};
  cfg.sigma_n_grid = {0.2, 0.3, 0.5, 1.0};
  cfg.length_scale_grid = {0.1, 0.2, 0.3, 0.5, 1.0};
  cfg.replicates = 100;
  cfg.iterations = 100;
  cfg.normalizer_reps = 100;
  cfg.stats_replicates = 100;
  return cfg;
}

LogLikStats loglik_stats(const TimeSeries& series, const LinearGaussianModel& model_base,
                         const std::vector<std::size_t>& particle_counts, const std::vector<double>& thetas,
                         std::size_t replicates, std::uint64_t seed, const LogLikStatsOptions& options) {
  if (replicates < 2) throw std::invalid_argument("loglik_stats: need at least 2 replicates");
  require_nonempty(particle_counts, "particle_counts");
  require_nonempty(thetas, "thetas");

  LogLikStats stats;
  stats.particle_counts = particle_counts;
  stats.thetas = thetas;
  const std::size_t n_theta = thetas.size();
  const std::size_t n_cells = particle_counts.size() * n_theta;
  std::vector<double> values(n_cells * replicates);

  parallel_for(values.size(), options.threads, [&](std::size_t task) {
    const std::size_t cell = task / replicates;
    const std::size_t rep = task % replicates;
    const std::size_t mi = cell / n_theta;
    const std::size_t ti = cell % n_theta;
    PFConfig cfg;
    cfg.particles = particle_counts[mi];
    cfg.ess_threshold_fraction = options.ess_threshold_fraction;
    cfg.seed = derive_seed(seed, StreamPurpose::loglik_stats, {mi, ti, options.reuse_first_seed ? 0 : rep});
    try {
      values[task] = pf_loglik(thetas[ti], series, model_base, cfg).loglik;
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "loglik_stats (m = " << particle_counts[mi] << ", theta = " << thetas[ti] << ", replicate " << rep
          << "): " << e.what();
      throw std::runtime_error(msg.str());
    }
  });

  stats.cells.reserve(n_cells);
  for (std::size_t cell = 0; cell < n_cells; ++cell) {
    const double* v = values.data() + cell * replicates;
    double mean = 0.0;
    for (std::size_t r = 0; r < replicates; ++r) mean += v[r];
    mean /= static_cast<double>(replicates);
    double ss = 0.0;
    for (std::size_t r = 0; r < replicates; ++r) ss += (v[r] - mean) * (v[r] - mean);
    const double var = ss / static_cast<double>(replicates - 1);
    stats.cells.push_back({particle_counts[cell / n_theta], thetas[cell % n_theta], mean, var, std::sqrt(var)});
  }
  for (double th : thetas) stats.kalman.push_back(kalman_loglik(th, series, model_base));
  return stats;
}

MSECurve mse_curve(const CellResult& cell, const MLEResult& mle) {
  MSECurve curve{cell.particles, cell.sigma_n, cell.length_scale, {}, {}};
  if (cell.replicates.empty()) return curve;
  const std::size_t points = cell.replicates.front().trace.incumbent_sequence().size();
  curve.mse_x.assign(points, 0.0);
  curve.mse_f.assign(points, 0.0);
  for (const ReplicateResult& rep : cell.replicates) {
    const auto seq = rep.trace.incumbent_sequence();
    if (seq.size() != points || rep.incumbent_loglik.size() != points)
      throw std::logic_error("mse_curve: replicates have different iteration counts");
    for (std::size_t i = 0; i < points; ++i) {
      const double dx = seq[i].incumbent_x - mle.theta_star;
      const double df = rep.incumbent_loglik[i] - mle.loglik_star;
      curve.mse_x[i] += dx * dx;
      curve.mse_f[i] += df * df;
    }
  }
  const double r = static_cast<double>(cell.replicates.size());
  for (std::size_t i = 0; i < points; ++i) {
    curve.mse_x[i] /= r;
    curve.mse_f[i] /= r;
  }
  return curve;
}

TimeSeries load_or_simulate(const ExperimentConfig& cfg) {
  if (cfg.series.file) return load_series(*cfg.series.file);
  return simulate(cfg.model_base.with_tau2(cfg.series.tau2), cfg.series.length, cfg.series.seed);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, bool with_stats) {
  cfg.validate();
  const TimeSeries series = load_or_simulate(cfg);
  ExperimentResult result;
  result.config = cfg;
  result.mle = kalman_mle(series, cfg.bo.lo, cfg.bo.hi, cfg.model_base);

  if (with_stats) {
    LogLikStatsOptions opts;
    opts.ess_threshold_fraction = cfg.ess_threshold_fraction;
    opts.threads = cfg.threads;
    result.stats = loglik_stats(series, cfg.model_base, cfg.particle_counts, cfg.bo.init_points,
                                cfg.stats_replicates, cfg.master_seed, opts);
  }

  std::vector<NoisyObjective> objectives;
  for (std::size_t m : cfg.particle_counts)
    objectives.push_back(pf_objective(series, cfg.model_base, m, cfg.ess_threshold_fraction));

  result.normalizers.resize(cfg.particle_counts.size());
  parallel_for(cfg.particle_counts.size(), cfg.threads, [&](std::size_t mi) {
    result.normalizers[mi] = build_normalizer(objectives[mi], cfg.bo.init_points, cfg.normalizer_reps,
                                              derive_seed(cfg.master_seed, StreamPurpose::normalizer, {mi}));
  });

  for (std::size_t mi = 0; mi < cfg.particle_counts.size(); ++mi) {
    for (double sn : cfg.sigma_n_grid) {
      for (double ls : cfg.length_scale_grid) {
        CellResult cell;
        cell.particles = cfg.particle_counts[mi];
        cell.sigma_n = sn;
        cell.length_scale = ls;
        cell.normalizer = result.normalizers[mi];
        cell.replicates.resize(cfg.replicates);
        result.cells.push_back(std::move(cell));
      }
    }
  }

  const std::size_t cells_per_m = cfg.sigma_n_grid.size() * cfg.length_scale_grid.size();
  parallel_for(result.cells.size() * cfg.replicates, cfg.threads, [&](std::size_t task) {
    const std::size_t ci = task / cfg.replicates;
    const std::size_t rep = task % cfg.replicates;
    CellResult& cell = result.cells[ci];
    BOConfig bo = cfg.bo;
    bo.hp.sigma_n = cell.sigma_n;
    bo.hp.length_scale = cell.length_scale;
    bo.max_iters = cfg.iterations;
    bo.stop_on_convergence = false;
    // Shared across cells: replicate r sees the same evaluation streams in
    // every hyperparameter cell.
    bo.seed = derive_seed(cfg.master_seed, StreamPurpose::experiment, {rep});
    try {
      ReplicateResult out;
      out.trace = bo_run(objectives[ci / cells_per_m], bo, cell.normalizer);
      for (const BORecord& r : out.trace.incumbent_sequence())
        out.incumbent_loglik.push_back(kalman_loglik(r.incumbent_x, series, cfg.model_base));
      cell.replicates[rep] = std::move(out);
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg << "experiment cell (m = " << cell.particles << ", sigma_n = " << cell.sigma_n
          << ", length_scale = " << cell.length_scale << "), replicate " << rep << ": " << e.what();
      throw std::runtime_error(msg.str());
    }
  });

  for (const CellResult& cell : result.cells) result.curves.push_back(mse_curve(cell, result.mle));
  return result;
}

std::string mse_band(double log10_value, double log10_min) {
  const double gap = log10_value - log10_min;
  if (gap == 0.0) return "min";
  if (gap <= 0.30) return "within_0.30";
  if (gap > 1.0) return "above_1.0";
  return "";
}

void export_tables(const ExperimentResult& result, const std::filesystem::path& dir) {
  const ExperimentConfig& cfg = result.config;

  {
    std::ostringstream out;
    out << "particles,statistic";
    if (result.stats)
      for (double th : result.stats->thetas) out << ",theta_" << format_double(th);
    out << '\n';
    if (result.stats) {
      const LogLikStats& s = *result.stats;
      for (std::size_t mi = 0; mi < s.particle_counts.size(); ++mi) {
        for (const char* stat : {"mean", "var", "sd"}) {
          out << s.particle_counts[mi] << ',' << stat;
          for (std::size_t ti = 0; ti < s.thetas.size(); ++ti) {
            const LogLikCell& c = s.at(mi, ti);
            const std::string_view name = stat;
            out << ',' << format_double(name == "mean" ? c.mean : name == "var" ? c.variance : c.sd);
          }
          out << '\n';
        }
      }
      out << "kalman,loglik";
      for (double v : s.kalman) out << ',' << format_double(v);
      out << '\n';
    }
    io::write_file_atomic(dir / ExportFiles::loglik_stats, out.str());
  }

  {
    std::ostringstream out;
    out << "particles,iter,sigma_n,length_scale,log10_mse_x,log10_mse_f,band_x,band_f\n";
    for (std::size_t m : cfg.particle_counts) {
      for (std::size_t iter : cfg.table_iters) {
        std::vector<const MSECurve*> group;
        for (const MSECurve& c : result.curves)
          if (c.particles == m && iter < c.mse_x.size()) group.push_back(&c);
        if (group.empty()) continue;
        double min_x = std::numeric_limits<double>::infinity();
        double min_f = std::numeric_limits<double>::infinity();
        for (const MSECurve* c : group) {
          min_x = std::min(min_x, log10_or_neg_inf(c->mse_x[iter]));
          min_f = std::min(min_f, log10_or_neg_inf(c->mse_f[iter]));
        }
        for (const MSECurve* c : group) {
          const double lx = log10_or_neg_inf(c->mse_x[iter]);
          const double lf = log10_or_neg_inf(c->mse_f[iter]);
          out << m << ',' << iter << ',' << format_double(c->sigma_n) << ',' << format_double(c->length_scale) << ','
              << format_double(lx) << ',' << format_double(lf) << ',' << mse_band(lx, min_x) << ','
              << mse_band(lf, min_f) << '\n';
        }
      }
    }
    io::write_file_atomic(dir / ExportFiles::mse_table, out.str());
  }

  {
    std::ostringstream out;
    out << "particles,sigma_n,length_scale,iter,mse_x,mse_f,log10_mse_x,log10_mse_f\n";
    for (const MSECurve& c : result.curves) {
      for (std::size_t i = 0; i < c.mse_x.size(); ++i) {
        out << c.particles << ',' << format_double(c.sigma_n) << ',' << format_double(c.length_scale) << ',' << i
            << ',' << format_double(c.mse_x[i]) << ',' << format_double(c.mse_f[i]) << ','
            << format_double(log10_or_neg_inf(c.mse_x[i])) << ',' << format_double(log10_or_neg_inf(c.mse_f[i]))
            << '\n';
      }
    }
    io::write_file_atomic(dir / ExportFiles::mse_curves, out.str());
  }

  {
    std::ostringstream out;
    out << "particles,sigma_n,length_scale,replicate,iter,kappa,theta,mean,sd,lower,upper\n";
    for (const CellResult& cell : result.cells) {
      if (cell.replicates.empty()) continue;
      const BOTrace& trace = cell.replicates.front().trace;
      GPHyperParams<double> hp = cfg.bo.hp;
      hp.sigma_n = cell.sigma_n;
      hp.length_scale = cell.length_scale;
      const std::size_t done = trace.records.size() - trace.initial_count;
      for (std::size_t iter : cfg.snapshot_iters) {
        if (iter == 0 || iter > done) continue;
        const GPPosterior<double> post = posterior_at(trace, hp, iter);
        const double k = cfg.bo.kappa_override ? *cfg.bo.kappa_override : kappa(iter, cfg.bo.delta);
        for (std::size_t g = 0; g < cfg.snapshot_grid; ++g) {
          const double u = static_cast<double>(g) / static_cast<double>(cfg.snapshot_grid - 1);
          const GPPrediction<double> p = post.predict(u);
          const double sd = std::sqrt(p.variance);
          out << cell.particles << ',' << format_double(cell.sigma_n) << ',' << format_double(cell.length_scale)
              << ",0," << iter << ',' << format_double(k) << ',' << format_double(trace.lo + u * (trace.hi - trace.lo))
              << ',' << format_double(p.mean) << ',' << format_double(sd) << ',' << format_double(p.mean - k * sd)
              << ',' << format_double(p.mean + k * sd) << '\n';
        }
      }
    }
    io::write_file_atomic(dir / ExportFiles::posterior_snapshots, out.str());
  }

  {
    std::ostringstream out;
    out << "particles,sigma_n,length_scale,replicate,t,abs_dx,abs_dx_unit,abs_dmean_std,abs_dloglik_kf,"
           "criterion_met,converged_at\n";
    for (const CellResult& cell : result.cells) {
      for (std::size_t r = 0; r < cell.replicates.size(); ++r) {
        const ReplicateResult& rep = cell.replicates[r];
        const auto seq = rep.trace.incumbent_sequence();
        const double width = rep.trace.hi - rep.trace.lo;
        const std::string conv = rep.trace.converged_at ? std::to_string(*rep.trace.converged_at) : "";
        BOTrace prefix = rep.trace;
        for (std::size_t t = 1; t < seq.size(); ++t) {
          const double dx = std::abs(seq[t].incumbent_x - seq[t - 1].incumbent_x);
          const double dm = std::abs(seq[t].incumbent_mean - seq[t - 1].incumbent_mean);
          const double df = std::abs(rep.incumbent_loglik[t] - rep.incumbent_loglik[t - 1]);
          prefix.records.resize(rep.trace.initial_count + t);
          const bool met = check_convergence(prefix, cfg.bo.eps_x, cfg.bo.eps_f, cfg.bo.patience);
          out << cell.particles << ',' << format_double(cell.sigma_n) << ',' << format_double(cell.length_scale)
              << ',' << r << ',' << t << ',' << format_double(dx) << ',' << format_double(dx / width) << ','
              << format_double(dm) << ',' << format_double(df) << ',' << (met ? 1 : 0) << ',' << conv << '\n';
        }
      }
    }
    io::write_file_atomic(dir / ExportFiles::convergence, out.str());
  }

  {
    std::ostringstream out;
    out << "particles,sigma_n,length_scale,replicate,row,t,initial,x_evaluated,raw_value,std_value,kappa,"
           "incumbent_x,incumbent_mean,incumbent_loglik_kf\n";
    for (const CellResult& cell : result.cells) {
      for (std::size_t r = 0; r < cell.replicates.size(); ++r) {
        const ReplicateResult& rep = cell.replicates[r];
        const std::size_t first = rep.trace.initial_count > 0 ? rep.trace.initial_count - 1 : 0;
        for (std::size_t k = 0; k < rep.trace.records.size(); ++k) {
          const BORecord& rec = rep.trace.records[k];
          out << cell.particles << ',' << format_double(cell.sigma_n) << ',' << format_double(cell.length_scale)
              << ',' << r << ',' << k << ',' << rec.t << ',' << (k < rep.trace.initial_count ? 1 : 0) << ','
              << format_double(rec.x_evaluated) << ',' << format_double(rec.raw_value) << ','
              << format_double(rec.std_value) << ',' << format_double(rec.kappa) << ','
              << format_double(rec.incumbent_x) << ',' << format_double(rec.incumbent_mean) << ',';
          if (k >= first) out << format_double(rep.incumbent_loglik[k - first]);
          out << '\n';
        }
      }
    }
    io::write_file_atomic(dir / ExportFiles::traces, out.str());
  }
}

MSECurves read_mse_curves(const std::filesystem::path& path) {
  const std::string text = io::read_file(path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": missing header");
  MSECurves curves;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = io::split_csv_line(line);
    if (f.size() != 8) throw std::runtime_error(path.string() + ": line " + std::to_string(line_no) + ": expected 8 fields");
    const auto particles = static_cast<std::size_t>(io::parse_double(f[0]));
    const double sn = io::parse_double(f[1]);
    const double ls = io::parse_double(f[2]);
    const auto iter = static_cast<std::size_t>(io::parse_double(f[3]));
    if (curves.empty() || curves.back().particles != particles || curves.back().sigma_n != sn ||
        curves.back().length_scale != ls)
      curves.push_back({particles, sn, ls, {}, {}});
    MSECurve& c = curves.back();
    if (iter != c.mse_x.size())
      throw std::runtime_error(path.string() + ": line " + std::to_string(line_no) + ": iterations out of order");
    c.mse_x.push_back(io::parse_double(f[4]));
    c.mse_f.push_back(io::parse_double(f[5]));
  }
  return curves;
}

}  // namespace pfbo::bench
