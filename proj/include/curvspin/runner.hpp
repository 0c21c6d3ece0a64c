#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "curvspin/config.hpp"

namespace curvspin {

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {"geometry-report", "field-map", "flux",
                                                 "spectrum", "conductance", "forces",
                                                 "evolve", "expansions"};
  return names;
}

struct RunOptions {
  std::string out_dir;  ///< empty: config "out" key, else "out"
  std::optional<std::uint64_t> seed;
  std::optional<std::string> experiment;  ///< overrides the config
  bool si = false;
  bool quiet = false;  ///< suppress the summary line on stdout
};

struct RunResult {
  int exit_code = 0;
  std::string experiment;
  std::vector<std::string> artifacts;  ///< paths written
  std::string summary;                 ///< one line
  nlohmann::json error;                ///< populated on failure
};

/// Runs one experiment. Never throws for config or experiment failures: they
/// become exit codes (2 config, 3 experiment) plus error.json in out_dir.
RunResult run(const Config& config, const RunOptions& options);
RunResult run_file(const std::string& config_path, const RunOptions& options);
RunResult run_text(const std::string& config_text, const RunOptions& options);

struct CompareReport {
  bool passed = true;
  std::string experiment;
  nlohmann::json details;
};

class CompareError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fieldwise relative comparison of two CSV or two JSON artifacts of the same
/// experiment. Throws CompareError on a type mismatch.
CompareReport compare_artifacts(const std::string& a, const std::string& b, double tolerance);

}  // namespace curvspin
