#include "maxdual/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace maxdual {

void ExperimentConfig::validate() const {
  if (n != 1 && n != 2) throw ConfigError("dim must be 1 or 2");
  if (m < 1) throw ConfigError("m must be positive");
  if (n == 1 && m > 12) throw ConfigError("m <= 12 required for dim 1");
  if (n == 2 && m > 6) throw ConfigError("m <= 6 required for dim 2");
  if (!(eta > 0 && eta < 1)) throw ConfigError("eta must be in (0,1)");
  if (!(gamma > 1)) throw ConfigError("gamma must exceed 1");
  if (command == "duality") {
    for (int r : resolutions) {
      if (r < 1 || (n == 1 && r > 12) || (n == 2 && r > 6))
        throw ConfigError("resolution out of range in resolutions list");
    }
  }
}

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

std::string unquote(std::string v) {
  if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') || (v.front() == '\'' && v.back() == '\'')))
    return v.substr(1, v.size() - 2);
  return v;
}

std::vector<int> parse_int_array(const std::string& v) {
  std::vector<int> out;
  std::string body = v;
  if (!body.empty() && body.front() == '[') body = body.substr(1, body.find(']') - 1);
  std::stringstream ss(body);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (tok.empty()) continue;
    out.push_back(std::stoi(tok));
  }
  return out;
}

}  // namespace

void apply_config_line(ExperimentConfig& cfg, const std::string& key, const std::string& raw) {
  std::string value = unquote(trim(raw));
  try {
    if (key == "command") cfg.command = value;
    else if (key == "dim" || key == "n") cfg.n = std::stoi(value);
    else if (key == "m") cfg.m = std::stoi(value);
    else if (key == "seed") cfg.seed = std::stoull(value);
    else if (key == "out_dir") cfg.out_dir = value;
    else if (key == "space" || key == "preset") cfg.space = value;
    else if (key == "space.p" || key == "p") cfg.p_preset = value;
    else if (key == "space.w" || key == "w") cfg.w_preset = value;
    else if (key == "f") cfg.f_preset = value;
    else if (key == "kind") cfg.kind = value;
    else if (key == "eta") cfg.eta = std::stod(value);
    else if (key == "gamma") cfg.gamma = std::stod(value);
    else if (key == "norm_surrogate" || key == "A") cfg.norm_surrogate = std::stod(value);
    else if (key == "safety_factor") cfg.safety_factor = std::stod(value);
    else if (key == "rdf_terms") cfg.rdf_terms = std::stoi(value);
    else if (key == "trials") cfg.trials = std::stoull(value);
    else if (key == "resolutions") cfg.resolutions = parse_int_array(value);
    else if (key.rfind("constants.", 0) == 0) cfg.overrides[key.substr(10)] = std::stod(value);
    else throw ConfigError("unknown config key '" + key + "'");
  } catch (const ConfigError&) {
    throw;
  } catch (...) {
    throw ConfigError("bad value for config key '" + key + "'");
  }
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  ExperimentConfig cfg;
  std::string line, section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      auto close = line.find(']');
      if (close == std::string::npos)
        throw ConfigError("unterminated section header at line " + std::to_string(lineno));
      section = trim(line.substr(1, close - 1));
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected key = value at line " + std::to_string(lineno));
    std::string key = trim(line.substr(0, eq));
    if (!section.empty()) key = section + "." + key;
    apply_config_line(cfg, key, line.substr(eq + 1));
  }
  return cfg;
}

}  // namespace maxdual
