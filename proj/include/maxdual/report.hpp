#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace maxdual {

// Structured record of a numerical experiment: inputs, fitted constants,
// worst-case ratios, pass/fail.  `data` carries everything the JSON report
// needs; `csv_*` hold one row per trial / bin for external plotting.
struct ProbeReport {
  std::string id;
  bool pass = true;
  nlohmann::ordered_json data = nlohmann::ordered_json::object();
  std::vector<std::string> csv_header;
  std::vector<std::vector<double>> csv_rows;
  std::vector<std::string> notes;

  void note(const std::string& s) { notes.push_back(s); }
  void fail(const std::string& why) {
    pass = false;
    notes.push_back("FAIL: " + why);
  }

  std::string to_json_text(bool with_timestamp = true) const;
  std::string to_csv_text() const;
  std::string summary_line() const;
};

// Writes report.json / report.csv / summary.txt under dir (created if needed).
void write_report_files(const ProbeReport& r, const std::string& dir);

std::string format_double(double v);

}  // namespace maxdual
