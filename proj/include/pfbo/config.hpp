#ifndef PFBO_CONFIG_HPP
#define PFBO_CONFIG_HPP

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "pfbo/bench.hpp"

namespace pfbo::config {

/// Schema violation; `what()` starts with the JSON pointer of the offending
/// field, e.g. "/series/simulate/length: required field is missing".
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string pointer, const std::string& message)
      : std::invalid_argument(pointer + ": " + message), pointer_(std::move(pointer)) {}
  const std::string& pointer() const noexcept { return pointer_; }

 private:
  std::string pointer_;
};

/// Reads an experiment config, starting from `base` (a profile) for every
/// optional field. "series" is always required.
bench::ExperimentConfig experiment_from_json(const nlohmann::json& j, const bench::ExperimentConfig& base);

/// Every field materialized; experiment_from_json(to_json(c), any) == c.
nlohmann::json to_json(const bench::ExperimentConfig& cfg);

nlohmann::json to_json(const BOConfig& cfg);
nlohmann::json to_json(const LinearGaussianModel& model);

}  // namespace pfbo::config

#endif  // PFBO_CONFIG_HPP
