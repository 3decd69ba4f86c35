#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "maxdual/config.hpp"
#include "maxdual/presets.hpp"
#include "maxdual/report.hpp"

using namespace maxdual;

TEST_CASE("report json is deterministic without the timestamp") {
  ProbeReport r;
  r.id = "demo";
  r.data["value"] = 0.123456789012345;
  r.data["count"] = 7;
  r.csv_header = {"a", "b"};
  r.csv_rows = {{1.0, 2.0}, {3.0, 0.1}};
  r.note("a note");
  CHECK(r.to_json_text(false) == r.to_json_text(false));
  CHECK(r.to_csv_text() == r.to_csv_text());
  CHECK(r.summary_line() == "PASS  demo");
  r.fail("bad");
  CHECK(r.summary_line() == "FAIL  demo");
}

TEST_CASE("csv numbers round-trip at full precision") {
  ProbeReport r;
  r.csv_header = {"x"};
  double v = 0.1 + 0.2;
  r.csv_rows = {{v}};
  std::string text = r.to_csv_text();
  double parsed = std::stod(text.substr(text.find('\n') + 1));
  CHECK(parsed == v);
}

TEST_CASE("config file parsing with sections and overrides") {
  std::string path = "test_config.tmp";
  {
    std::ofstream out(path);
    out << "# experiment\n"
        << "command = duality\n"
        << "m = 6\n"
        << "seed = 99\n"
        << "resolutions = [5, 6]\n"
        << "[space]\n"
        << "p = \"affine:2,1\"\n"
        << "w = 'const:1'\n"
        << "[constants]\n"
        << "r = 1.5\n";
  }
  ExperimentConfig cfg = parse_config_file(path);
  std::remove(path.c_str());
  CHECK(cfg.command == "duality");
  CHECK(cfg.m == 6);
  CHECK(cfg.seed == 99);
  CHECK(cfg.p_preset == "affine:2,1");
  CHECK(cfg.w_preset == "const:1");
  REQUIRE(cfg.resolutions.size() == 2);
  CHECK(cfg.resolutions[1] == 6);
  CHECK(cfg.overrides.at("r") == 1.5);
  cfg.validate();
}

TEST_CASE("config errors") {
  ExperimentConfig cfg;
  CHECK_THROWS_AS(apply_config_line(cfg, "no_such_key", "1"), ConfigError);
  CHECK_THROWS_AS(apply_config_line(cfg, "m", "not_a_number"), ConfigError);
  cfg.m = 13;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.m = 7;
  cfg.n = 2;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.m = 6;
  cfg.validate();  // non-duality commands ignore the resolutions list
  cfg.command = "duality";
  CHECK_THROWS_AS(cfg.validate(), ConfigError);  // default resolutions exceed the dim-2 ceiling
  cfg.resolutions = {4, 6};
  cfg.validate();
  CHECK_THROWS_AS(parse_config_file("definitely_missing.toml"), ConfigError);
}

TEST_CASE("preset parsing") {
  CHECK_THROWS(exponent_preset("mystery:2", 1, 4));
  CHECK_THROWS(exponent_preset("const", 1, 4));
  CHECK_THROWS(weight_preset("power-weight", 1, 4));
  CHECK(weight_preset("power-weight:-0.9", 1, 6).values().size() == 3u << 6);
  LatticeFunction f = function_preset("block:2,0,0.25", 1, 5);
  double mass = integrate(f, support_box(1));
  CHECK(mass == doctest::Approx(0.5).epsilon(1e-12));
  LatticeFunction s = function_preset("spike:0.5", 1, 5);
  CHECK(integrate(s, support_box(1)) == doctest::Approx(1.0).epsilon(1e-12));
}
