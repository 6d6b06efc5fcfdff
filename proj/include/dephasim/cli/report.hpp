#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dephasim/error.hpp"

namespace dephasim::cli {

struct CheckVerdict {
  std::string name;
  bool pass = true;
  double residual = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct RunReport {
  std::string command;
  std::vector<CheckVerdict> checks;
  std::vector<std::string> files;
  std::vector<std::pair<std::string, double>> timings;  // seconds
  std::vector<std::string> warnings;

  /// Records a check; it fails iff residual > tolerance (NaN fails).
  CheckVerdict& check(std::string name, double residual, double tolerance, std::string detail = {}) {
    const bool pass = residual <= tolerance;
    checks.push_back({std::move(name), pass, residual, tolerance, std::move(detail)});
    return checks.back();
  }

  CheckVerdict& fail(std::string name, std::string detail) {
    checks.push_back({std::move(name), false, std::nan(""), 0.0, std::move(detail)});
    return checks.back();
  }

  bool failed() const {
    for (const auto& c : checks)
      if (!c.pass) return true;
    return false;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["command"] = command;
    j["status"] = failed() ? "FAIL" : "PASS";
    j["checks"] = nlohmann::json::array();
    for (const auto& c : checks) {
      nlohmann::json cj{{"name", c.name}, {"verdict", c.pass ? "PASS" : "FAIL"}, {"tolerance", c.tolerance}};
      cj["residual"] = std::isfinite(c.residual) ? nlohmann::json(c.residual) : nlohmann::json(nullptr);
      if (!c.detail.empty()) cj["detail"] = c.detail;
      j["checks"].push_back(cj);
    }
    j["files"] = files;
    j["timings"] = nlohmann::json::object();
    for (const auto& [k, v] : timings) j["timings"][k] = v;
    j["warnings"] = warnings;
    return j;
  }

  /// One line per check, as printed by the CLI.
  std::string summary() const {
    std::string out;
    char buf[512];
    for (const auto& c : checks) {
      std::snprintf(buf, sizeof buf, "%-4s %-40s residual=%-12.4g tol=%-10.3g %s\n",
                    c.pass ? "PASS" : "FAIL", c.name.c_str(), c.residual, c.tolerance,
                    c.detail.c_str());
      out += buf;
    }
    return out;
  }
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

/// CSV writer: fixed header, %.17g values, '.' separator, LF line endings.
/// Refuses non-finite values.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
      : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
    for (std::size_t k = 0; k < header.size(); ++k) out_ << (k ? "," : "") << header[k];
    out_ << '\n';
  }

  void row(const std::vector<double>& values) {
    std::string line;
    char buf[64];
    for (std::size_t k = 0; k < values.size(); ++k) {
      double v = values[k];
      if (!std::isfinite(v))
        throw Error(ErrorCode::NonConvergence, "non-finite value in " + path_.string());
      if (v == 0.0) v = 0.0;  // no "-0"
      std::snprintf(buf, sizeof buf, "%.17g", v);
      if (k) line += ',';
      line += buf;
    }
    line += '\n';
    out_ << line;
  }

  void close() {
    out_.close();
    if (!out_) throw Error(ErrorCode::Io, "failed writing '" + path_.string() + "'");
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

}  // namespace dephasim::cli
