#include <doctest.h>

#include <cmath>
#include <limits>

#include "canonlift/errors.hpp"
#include "canonlift/report.hpp"

using namespace canonlift;

namespace {

VerificationReport sample_report() {
  VerificationReport r;
  r.config = {{"model", "fubini_study"}, {"n", 2}, {"seed", 7}};
  r.add(timed_check("zeta", "d d = 0", Comparison::Below, 1e-10, [] { return 3e-16; }));
  r.add(timed_check("alpha", "c = 2(n+1)", Comparison::Near, 1e-8, [] { return 6.0 + 1e-12; }, 6.0));
  r.add(timed_check("gate", "|s^* gamma| > 0.1", Comparison::Above, 0.1, [] { return 0.6; }));
  CheckRecord info;
  info.name = "phase";
  info.anchor = "optimal phase";
  info.comparison = Comparison::Info;
  info.value = 0.1 + 0.2;
  info.detail = {{"samples", 10}};
  info.judge();
  r.add(info);
  r.side_files.push_back("area.csv");
  return r;
}

}  // namespace

TEST_CASE("records are judged by their comparison") {
  CHECK(*timed_check("a", "", Comparison::Below, 1.0, [] { return 0.5; }).pass);
  CHECK_FALSE(*timed_check("a", "", Comparison::Below, 1.0, [] { return 1.0; }).pass);
  CHECK(*timed_check("a", "", Comparison::Above, 0.1, [] { return 0.2; }).pass);
  CHECK(*timed_check("a", "", Comparison::Near, 1e-3, [] { return 2.0005; }, 2.0).pass);
  CHECK_FALSE(*timed_check("a", "", Comparison::Near, 1e-3, [] { return 2.0; }).pass);
  const auto nan = timed_check("a", "", Comparison::Below, 1.0,
                               [] { return std::numeric_limits<double>::quiet_NaN(); });
  CHECK_FALSE(nan.value);
  CHECK_FALSE(*nan.pass);
  CHECK(timed_check("a", "", Comparison::Info, 0.0, [] { return 1.0; }).pass == std::nullopt);
}

TEST_CASE("verdict is the conjunction of non-null passes") {
  VerificationReport r = sample_report();
  CHECK(r.verdict());
  CHECK(r.failures().empty());
  r.add(timed_check("broken", "x", Comparison::Below, 1e-8, [] { return 1.0; }));
  CHECK_FALSE(r.verdict());
  REQUIRE(r.failures().size() == 1);
  CHECK(r.failures()[0] == "broken");
  CHECK_FALSE(VerificationReport{}.verdict());
  CHECK_THROWS_AS(r.add(timed_check("broken", "x", Comparison::Below, 1, [] { return 0.0; })), ConfigError);
}

TEST_CASE("checks are sorted by name and the schema is versioned") {
  const auto j = sample_report().to_json();
  CHECK(j["schema"] == 1);
  CHECK(j["verdict"] == true);
  std::vector<std::string> names;
  for (const auto& c : j["checks"]) names.push_back(c["name"]);
  CHECK(names == std::vector<std::string>{"alpha", "gate", "phase", "zeta"});
  CHECK(j["checks"][2]["pass"].is_null());
  CHECK(j["checks"][0].contains("wall_time_s"));
  CHECK_FALSE(sample_report().to_json(false)["checks"][0].contains("wall_time_s"));
}

TEST_CASE("json round trip is lossless") {
  const VerificationReport r = sample_report();
  const std::string text = r.to_json().dump(2);
  const VerificationReport back = VerificationReport::from_json(nlohmann::json::parse(text));
  CHECK(back.to_json().dump() == r.to_json().dump());
  CHECK(back.find("phase")->value == 0.1 + 0.2);
  CHECK(back.find("alpha")->value == 6.0 + 1e-12);
  CHECK(back.hash() == r.hash());

  auto bad = r.to_json();
  bad["schema"] = 2;
  CHECK_THROWS_AS(VerificationReport::from_json(bad), ConfigError);
  auto lying = r.to_json();
  lying["verdict"] = false;
  CHECK_THROWS_AS(VerificationReport::from_json(lying), ConfigError);
}

TEST_CASE("hash ignores wall times only") {
  VerificationReport a = sample_report();
  VerificationReport b = sample_report();
  auto j = b.to_json();
  for (auto& c : j["checks"]) c["wall_time_s"] = 123.0;
  b = VerificationReport::from_json(j);
  CHECK(a.hash() == b.hash());
  CHECK(a.hash().size() == 16);

  j["checks"][0]["value"] = 6.0 + 2e-12;
  CHECK(VerificationReport::from_json(j).hash() != a.hash());
  VerificationReport c = sample_report();
  c.config["seed"] = 8;
  CHECK(c.hash() != a.hash());
}

TEST_CASE("fnv1a reference values") {
  CHECK(fnv1a("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a("foobar") == 0x85944171f73967e8ull);
}
