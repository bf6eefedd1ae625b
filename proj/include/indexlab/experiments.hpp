#pragma once

#include <cstdint>
#include <map>
#include <string>

#include <json.hpp>

#include "indexlab/common.hpp"

namespace indexlab::experiments {

using json = nlohmann::json;

struct ExperimentConfig {
  std::string experiment;
  json parameters = json::object();
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  Tolerances tolerances;

  // Strict parse: unknown keys anywhere are a config error.
  static ExperimentConfig from_json(const json& j);
  static ExperimentConfig from_file(const std::string& path);
};

struct ResultRecord {
  std::string experiment;
  json parameters = json::object();
  std::map<std::string, double> metrics;
  json details = json::object();
  bool pass = false;
  std::string anchor = "plumbing";
  double wall_time_ms = 0.0;

  json to_json() const;
};

// Runs one experiment: validates parameters, writes CSV tables and the
// ResultRecord JSON under out_dir, returns the record.
ResultRecord run(const ExperimentConfig& config);

const std::vector<std::string>& experiment_names();

// Applies "key=value" comma/semicolon-separated tolerance overrides.
void apply_tolerance_overrides(Tolerances& tol, const std::string& spec);

}  // namespace indexlab::experiments
