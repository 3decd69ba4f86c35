#include "maxdual/report.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace maxdual {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string ProbeReport::to_json_text(bool with_timestamp) const {
  nlohmann::ordered_json j;
  j["id"] = id;
  j["pass"] = pass;
  if (with_timestamp) {
    auto now = std::chrono::system_clock::now().time_since_epoch();
    j["timestamp"] = std::chrono::duration_cast<std::chrono::milliseconds>(now).count();
  }
  j["data"] = data;
  j["notes"] = notes;
  return j.dump(2) + "\n";
}

std::string ProbeReport::to_csv_text() const {
  std::string out;
  for (std::size_t i = 0; i < csv_header.size(); ++i) {
    if (i) out += ",";
    out += csv_header[i];
  }
  out += "\n";
  for (const auto& row : csv_rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ",";
      out += format_double(row[i]);
    }
    out += "\n";
  }
  return out;
}

std::string ProbeReport::summary_line() const {
  return std::string(pass ? "PASS" : "FAIL") + "  " + id;
}

void write_report_files(const ProbeReport& r, const std::string& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir + "/" + r.id + ".json", std::ios::binary);
    f << r.to_json_text();
  }
  if (!r.csv_header.empty()) {
    std::ofstream f(dir + "/" + r.id + ".csv", std::ios::binary);
    f << r.to_csv_text();
  }
  {
    std::ofstream f(dir + "/" + r.id + ".summary.txt", std::ios::binary);
    f << r.summary_line() << "\n";
    for (const auto& n : r.notes) f << "  " << n << "\n";
  }
}

}  // namespace maxdual
