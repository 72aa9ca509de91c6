#include "canonlift/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "canonlift/errors.hpp"

namespace canonlift {

const char* to_string(Comparison c) {
  switch (c) {
    case Comparison::Below: return "below";
    case Comparison::Above: return "above";
    case Comparison::Near: return "near";
    case Comparison::Info: return "info";
  }
  return "info";
}

Comparison parse_comparison(const std::string& s) {
  if (s == "below") return Comparison::Below;
  if (s == "above") return Comparison::Above;
  if (s == "near") return Comparison::Near;
  if (s == "info") return Comparison::Info;
  throw ConfigError("unknown comparison '" + s + "'");
}

void CheckRecord::judge() {
  if (comparison == Comparison::Info) {
    pass.reset();
    return;
  }
  if (!value) {
    pass = false;
    return;
  }
  switch (comparison) {
    case Comparison::Below: pass = *value < tolerance; break;
    case Comparison::Above: pass = *value > tolerance; break;
    case Comparison::Near:
      pass = expected && std::abs(*value - *expected) <= tolerance;
      break;
    case Comparison::Info: break;
  }
}

void VerificationReport::add(CheckRecord record) {
  auto it = std::lower_bound(checks_.begin(), checks_.end(), record.name,
                             [](const CheckRecord& r, const std::string& n) { return r.name < n; });
  if (it != checks_.end() && it->name == record.name)
    throw ConfigError("duplicate check name '" + record.name + "'");
  checks_.insert(it, std::move(record));
}

const CheckRecord* VerificationReport::find(const std::string& name) const {
  for (const auto& r : checks_)
    if (r.name == name) return &r;
  return nullptr;
}

bool VerificationReport::verdict() const {
  bool any = false;
  for (const auto& r : checks_) {
    if (!r.pass) continue;
    if (!*r.pass) return false;
    any = true;
  }
  return any;
}

std::vector<std::string> VerificationReport::failures() const {
  std::vector<std::string> out;
  for (const auto& r : checks_)
    if (r.pass && !*r.pass) out.push_back(r.name);
  return out;
}

namespace {

nlohmann::json number_or_null(const std::optional<double>& v) {
  if (v && std::isfinite(*v)) return *v;
  return nullptr;
}

std::optional<double> optional_number(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace

nlohmann::json VerificationReport::to_json(bool with_wall_times) const {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& r : checks_) {
    nlohmann::json c;
    c["name"] = r.name;
    c["anchor"] = r.anchor;
    c["comparison"] = to_string(r.comparison);
    c["value"] = number_or_null(r.value);
    c["expected"] = number_or_null(r.expected);
    c["tolerance"] = r.tolerance;
    c["pass"] = r.pass ? nlohmann::json(*r.pass) : nlohmann::json(nullptr);
    if (with_wall_times) c["wall_time_s"] = r.wall_time_s;
    c["detail"] = r.detail;
    checks.push_back(std::move(c));
  }
  nlohmann::json j;
  j["schema"] = kReportSchema;
  j["version"] = kVersion;
  j["config"] = config;
  j["checks"] = std::move(checks);
  j["side_files"] = side_files;
  j["verdict"] = verdict();
  return j;
}

VerificationReport VerificationReport::from_json(const nlohmann::json& j) {
  if (!j.contains("schema") || j.at("schema") != kReportSchema)
    throw ConfigError("unsupported report schema");
  VerificationReport r;
  r.config = j.at("config");
  r.side_files = j.at("side_files").get<std::vector<std::string>>();
  for (const auto& c : j.at("checks")) {
    CheckRecord rec;
    rec.name = c.at("name").get<std::string>();
    rec.anchor = c.at("anchor").get<std::string>();
    rec.comparison = parse_comparison(c.at("comparison").get<std::string>());
    rec.value = optional_number(c.at("value"));
    rec.expected = optional_number(c.at("expected"));
    rec.tolerance = c.at("tolerance").get<double>();
    if (!c.at("pass").is_null()) rec.pass = c.at("pass").get<bool>();
    rec.wall_time_s = c.value("wall_time_s", 0.0);
    rec.detail = c.value("detail", nlohmann::json::object());
    r.add(std::move(rec));
  }
  if (j.contains("verdict") && j.at("verdict").get<bool>() != r.verdict())
    throw ConfigError("report verdict does not match its records");
  return r;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string VerificationReport::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(to_json(false).dump())));
  return buf;
}

CheckRecord timed_check(std::string name, std::string anchor, Comparison comparison, double tolerance,
                        const std::function<double()>& compute, std::optional<double> expected) {
  CheckRecord r;
  r.name = std::move(name);
  r.anchor = std::move(anchor);
  r.comparison = comparison;
  r.tolerance = tolerance;
  r.expected = expected;
  const auto t0 = std::chrono::steady_clock::now();
  const double v = compute();
  r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (std::isfinite(v)) r.value = v;
  r.judge();
  return r;
}

}  // namespace canonlift
