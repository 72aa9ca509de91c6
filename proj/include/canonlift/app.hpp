#pragma once

// Command layer behind the canonlift executable.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "canonlift/report.hpp"

namespace canonlift {

struct RunConfig {
  std::string command;
  std::string model = "fubini_study";
  int n = 1;
  double c_prime = 1.0;
  std::uint64_t seed = 1;
  int samples = 20;
  /// overrides by check name
  std::map<std::string, double> tolerances;
  int resolution = 16;
  std::string output_path = "canonlift_report.json";

  std::string immersion = "hexagonal_torus";
  double phase = 0.0;
  double radius = 2.0;
  std::vector<std::string> loops;
  int steps = 2048;
  std::vector<int> n_list{1, 2};
  std::optional<double> c;
  double r_max = 0.0;
  int r_count = 25;

  /// Throws ConfigError naming the offending field.
  void validate() const;
  nlohmann::json to_json() const;
};

/// Commands: verify-model, verify-cy, verify-lift, holonomy, area-table, profile-plot.
const std::vector<std::string>& command_names();
/// Default tolerances of a command's checks; ConfigError for unknown commands.
const std::map<std::string, double>& default_tolerances(const std::string& command);

/// Runs one command. CSV side files (area-table, profile-plot) are written next
/// to output_path when `write_side_files` is set. Throws ConfigError.
VerificationReport run_command(const RunConfig& config, bool write_side_files = true);

/// "profile" -> "<dir>/<stem>_profile.csv" for the given report path.
std::string side_file_path(const std::string& report_path, const std::string& tag);

/// Exit codes: 0 all checks pass, 1 a check failed, 2 configuration or usage error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace canonlift
