#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace maxdual {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Batch experiment description, fed by a TOML-style config file plus CLI
// flag overrides.  Resolution ceilings: m <= 12 for n = 1, m <= 6 for n = 2.
struct ExperimentConfig {
  std::string command;
  int n = 1;
  int m = 8;
  std::uint64_t seed = 7;
  std::string out_dir = "out";
  std::string space = "calibration";  // named space or "custom"
  std::string p_preset = "const:2";
  std::string w_preset = "const:1";
  std::string f_preset = "block:2,0,0.25";
  std::string kind = "grid:0";  // full | grid:<sx>[,<sy>] | local
  double eta = 0.5;
  double gamma = 2.0;
  double norm_surrogate = 0.0;  // 0: estimate * safety_factor
  double safety_factor = 1.5;
  int rdf_terms = 12;
  std::size_t trials = 100;
  std::vector<int> resolutions = {6, 8, 10, 12};
  std::map<std::string, double> overrides;  // constants overrides by name

  void validate() const;
};

// Flat "key = value" file with optional [section] headers (keys become
// section.key), # comments, quoted strings and [a, b] integer arrays.
ExperimentConfig parse_config_file(const std::string& path);
void apply_config_line(ExperimentConfig& cfg, const std::string& key, const std::string& value);

}  // namespace maxdual
