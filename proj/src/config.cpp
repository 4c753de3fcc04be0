#include "pfbo/config.hpp"

#include <cmath>

namespace pfbo::config {

using nlohmann::json;

namespace {

std::string child(const std::string& ptr, const std::string& key) { return ptr + "/" + key; }

const json& require(const json& obj, const std::string& ptr, const std::string& key) {
  if (!obj.contains(key)) throw ConfigError(child(ptr, key), "required field is missing");
  return obj.at(key);
}

void require_object(const json& j, const std::string& ptr) {
  if (!j.is_object()) throw ConfigError(ptr.empty() ? "/" : ptr, "expected an object");
}

double as_number(const json& j, const std::string& ptr) {
  if (!j.is_number()) throw ConfigError(ptr, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(ptr, "expected a finite number");
  return v;
}

double as_positive(const json& j, const std::string& ptr) {
  const double v = as_number(j, ptr);
  if (!(v > 0.0)) throw ConfigError(ptr, "expected a number > 0");
  return v;
}

std::uint64_t as_unsigned(const json& j, const std::string& ptr) {
  if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() && j.get<std::int64_t>() < 0))
    throw ConfigError(ptr, "expected a non-negative integer");
  return j.get<std::uint64_t>();
}

std::size_t as_count(const json& j, const std::string& ptr) {
  const std::uint64_t v = as_unsigned(j, ptr);
  if (v == 0) throw ConfigError(ptr, "expected a positive integer");
  return static_cast<std::size_t>(v);
}

template <typename T, typename Conv>
std::vector<T> as_list(const json& j, const std::string& ptr, Conv conv, bool allow_empty = false) {
  if (!j.is_array()) throw ConfigError(ptr, "expected an array");
  if (!allow_empty && j.empty()) throw ConfigError(ptr, "expected a non-empty array");
  std::vector<T> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(static_cast<T>(conv(j[i], child(ptr, std::to_string(i)))));
  return out;
}

template <typename T, typename Conv>
void optional_field(const json& obj, const std::string& ptr, const std::string& key, T& target, Conv conv) {
  if (obj.contains(key)) target = conv(obj.at(key), child(ptr, key));
}

}  // namespace

bench::ExperimentConfig experiment_from_json(const json& j, const bench::ExperimentConfig& base) {
  require_object(j, "");
  bench::ExperimentConfig cfg = base;

  const json& series = require(j, "", "series");
  require_object(series, "/series");
  const bool has_file = series.contains("file");
  const bool has_sim = series.contains("simulate");
  if (has_file == has_sim) throw ConfigError("/series", "exactly one of 'file' or 'simulate' is required");
  if (has_file) {
    if (!series.at("file").is_string()) throw ConfigError("/series/file", "expected a string");
    cfg.series.file = series.at("file").get<std::string>();
  } else {
    const json& sim = series.at("simulate");
    require_object(sim, "/series/simulate");
    cfg.series.file.reset();
    const double tau2 = as_number(require(sim, "/series/simulate", "tau2"), "/series/simulate/tau2");
    if (tau2 < 0.0) throw ConfigError("/series/simulate/tau2", "expected a number >= 0");
    cfg.series.tau2 = tau2;
    cfg.series.length = as_count(require(sim, "/series/simulate", "length"), "/series/simulate/length");
    cfg.series.seed = as_unsigned(require(sim, "/series/simulate", "seed"), "/series/simulate/seed");
  }

  if (j.contains("model")) {
    const json& m = j.at("model");
    require_object(m, "/model");
    double obs_var = cfg.model_base.obs_var();
    double init_mean = cfg.model_base.init_mean();
    double init_var = cfg.model_base.init_var();
    optional_field(m, "/model", "obs_var", obs_var, as_positive);
    optional_field(m, "/model", "init_mean", init_mean, as_number);
    optional_field(m, "/model", "init_var", init_var, as_positive);
    cfg.model_base = LinearGaussianModel(0.0, obs_var, init_mean, init_var);
  }

  auto count_list = [](const json& v, const std::string& p) { return as_list<std::size_t>(v, p, as_count); };
  auto positive_list = [](const json& v, const std::string& p) { return as_list<double>(v, p, as_positive); };
  optional_field(j, "", "particle_counts", cfg.particle_counts, count_list);
  optional_field(j, "", "sigma_n", cfg.sigma_n_grid, positive_list);
  optional_field(j, "", "length_scale", cfg.length_scale_grid, positive_list);
  optional_field(j, "", "replicates", cfg.replicates, as_count);
  optional_field(j, "", "iterations", cfg.iterations,
                 [](const json& v, const std::string& p) { return static_cast<std::size_t>(as_unsigned(v, p)); });
  optional_field(j, "", "normalizer_reps", cfg.normalizer_reps, as_count);
  optional_field(j, "", "stats_replicates", cfg.stats_replicates, as_count);
  optional_field(j, "", "ess_threshold_fraction", cfg.ess_threshold_fraction, as_positive);
  optional_field(j, "", "snapshot_iters", cfg.snapshot_iters, count_list);
  optional_field(j, "", "table_iters", cfg.table_iters,
                 [](const json& v, const std::string& p) {
                   return as_list<std::size_t>(v, p, [](const json& e, const std::string& q) {
                     return static_cast<std::size_t>(as_unsigned(e, q));
                   });
                 });
  optional_field(j, "", "snapshot_grid", cfg.snapshot_grid, as_count);
  optional_field(j, "", "master_seed", cfg.master_seed, as_unsigned);
  optional_field(j, "", "threads", cfg.threads,
                 [](const json& v, const std::string& p) { return static_cast<std::size_t>(as_unsigned(v, p)); });
  if (j.contains("output_dir")) {
    if (!j.at("output_dir").is_string()) throw ConfigError("/output_dir", "expected a string");
    cfg.output_dir = j.at("output_dir").get<std::string>();
  }

  if (j.contains("bo")) {
    const json& b = j.at("bo");
    require_object(b, "/bo");
    if (b.contains("bounds")) {
      const auto bounds = as_list<double>(b.at("bounds"), "/bo/bounds", as_number);
      if (bounds.size() != 2 || !(bounds[0] < bounds[1]) || bounds[0] < 0.0)
        throw ConfigError("/bo/bounds", "expected [lo, hi] with 0 <= lo < hi");
      cfg.bo.lo = bounds[0];
      cfg.bo.hi = bounds[1];
    }
    optional_field(b, "/bo", "sigma_f", cfg.bo.hp.sigma_f, as_positive);
    optional_field(b, "/bo", "delta", cfg.bo.delta, as_positive);
    optional_field(b, "/bo", "init_points", cfg.bo.init_points,
                   [](const json& v, const std::string& p) { return as_list<double>(v, p, as_number); });
    optional_field(b, "/bo", "eps_x", cfg.bo.eps_x, as_positive);
    optional_field(b, "/bo", "eps_f", cfg.bo.eps_f, as_positive);
    optional_field(b, "/bo", "patience", cfg.bo.patience, as_count);
    optional_field(b, "/bo", "acquisition_grid", cfg.bo.acquisition_grid, as_count);
    optional_field(b, "/bo", "brent_tol", cfg.bo.brent_tol, as_positive);
  }

  try {
    cfg.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError("/", e.what());
  }
  return cfg;
}

json to_json(const LinearGaussianModel& model) {
  return {{"obs_var", model.obs_var()}, {"init_mean", model.init_mean()}, {"init_var", model.init_var()}};
}

json to_json(const BOConfig& cfg) {
  json j = {{"bounds", {cfg.lo, cfg.hi}},
            {"sigma_f", cfg.hp.sigma_f},
            {"sigma_n", cfg.hp.sigma_n},
            {"length_scale", cfg.hp.length_scale},
            {"delta", cfg.delta},
            {"max_iters", cfg.max_iters},
            {"init_points", cfg.init_points},
            {"eps_x", cfg.eps_x},
            {"eps_f", cfg.eps_f},
            {"patience", cfg.patience},
            {"acquisition_grid", cfg.acquisition_grid},
            {"brent_tol", cfg.brent_tol},
            {"seed", cfg.seed},
            {"stop_on_convergence", cfg.stop_on_convergence},
            {"normalizer_reps", cfg.normalizer_reps}};
  if (cfg.kappa_override) j["kappa_override"] = *cfg.kappa_override;
  return j;
}

json to_json(const bench::ExperimentConfig& cfg) {
  json series;
  if (cfg.series.file)
    series = {{"file", cfg.series.file->string()}};
  else
    series = {{"simulate", {{"tau2", cfg.series.tau2}, {"length", cfg.series.length}, {"seed", cfg.series.seed}}}};
  return {{"series", series},
          {"model", to_json(cfg.model_base)},
          {"particle_counts", cfg.particle_counts},
          {"sigma_n", cfg.sigma_n_grid},
          {"length_scale", cfg.length_scale_grid},
          {"replicates", cfg.replicates},
          {"iterations", cfg.iterations},
          {"bo",
           {{"bounds", {cfg.bo.lo, cfg.bo.hi}},
            {"sigma_f", cfg.bo.hp.sigma_f},
            {"delta", cfg.bo.delta},
            {"init_points", cfg.bo.init_points},
            {"eps_x", cfg.bo.eps_x},
            {"eps_f", cfg.bo.eps_f},
            {"patience", cfg.bo.patience},
            {"acquisition_grid", cfg.bo.acquisition_grid},
            {"brent_tol", cfg.bo.brent_tol}}},
          {"normalizer_reps", cfg.normalizer_reps},
          {"stats_replicates", cfg.stats_replicates},
          {"ess_threshold_fraction", cfg.ess_threshold_fraction},
          {"snapshot_iters", cfg.snapshot_iters},
          {"table_iters", cfg.table_iters},
          {"snapshot_grid", cfg.snapshot_grid},
          {"master_seed", cfg.master_seed},
          {"threads", cfg.threads},
          {"output_dir", cfg.output_dir.string()}};
}

}  // namespace pfbo::config
