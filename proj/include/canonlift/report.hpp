#pragma once

// Verification reports: named check records with the formula they test, a
// tolerance and a verdict, serialized as one JSON document.

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace canonlift {

inline constexpr int kReportSchema = 1;
inline constexpr const char* kVersion = "canonlift 0.1.0";

enum class Comparison { Below, Above, Near, Info };

const char* to_string(Comparison c);
Comparison parse_comparison(const std::string& s);

struct CheckRecord {
  std::string name;
  /// formula or statement the check tests
  std::string anchor;
  Comparison comparison = Comparison::Below;
  /// nullopt for non-finite values
  std::optional<double> value;
  std::optional<double> expected;
  double tolerance = 0.0;
  /// nullopt: warning or informational record, excluded from the verdict
  std::optional<bool> pass;
  double wall_time_s = 0.0;
  nlohmann::json detail = nlohmann::json::object();

  /// Sets pass from value, expected, tolerance and comparison.
  void judge();
};

class VerificationReport {
 public:
  nlohmann::json config = nlohmann::json::object();
  std::vector<std::string> side_files;

  void add(CheckRecord record);
  const std::vector<CheckRecord>& checks() const { return checks_; }
  const CheckRecord* find(const std::string& name) const;
  /// All non-null passes true; an empty report does not pass.
  bool verdict() const;
  std::vector<std::string> failures() const;

  nlohmann::json to_json(bool with_wall_times = true) const;
  static VerificationReport from_json(const nlohmann::json& j);
  /// FNV-1a (64 bit) of the canonical dump without wall times, as 16 hex digits.
  std::string hash() const;

 private:
  std::vector<CheckRecord> checks_;
};

std::uint64_t fnv1a(const std::string& bytes);

/// Runs `compute`, times it, and judges the result.
CheckRecord timed_check(std::string name, std::string anchor, Comparison comparison, double tolerance,
                        const std::function<double()>& compute, std::optional<double> expected = std::nullopt);

}  // namespace canonlift
