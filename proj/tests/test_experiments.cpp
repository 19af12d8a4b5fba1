#include <doctest.h>

#include "fioindex/experiments.hpp"
#include "fioindex/geometry.hpp"

#include <filesystem>
#include <fstream>
#include <algorithm>
#include <cmath>
#include <set>

using namespace fioindex;
using nlohmann::json;

namespace {

std::string field_of(const json& j) {
  try {
    parse_suite_config(j);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<none>";
}

}  // namespace

TEST_CASE("catalog lists the six kinds") {
  std::set<std::string> names;
  for (const auto& k : experiment_catalog()) {
    names.insert(k.name);
    CHECK(!k.anchor.empty());
    CHECK(k.schema.is_object());
  }
  CHECK(names == std::set<std::string>{"star_product", "egorov", "index_match", "weyl_identities", "trace_space",
                                       "residue"});
  CHECK_THROWS_AS(find_experiment("nope"), ConfigError);
}

TEST_CASE("config validation names the offending field") {
  CHECK(field_of(json{{"experiments", {{{"kind", "warp"}}}}}) == "/experiments/0/kind");
  CHECK(field_of(json{{"experiments", {{{"kind", "residue"}, {"params", {{"tol", "x"}}}}}}}) ==
        "/experiments/0/params/tol");
  CHECK(field_of(json{{"experiments", {{{"kind", "residue"}, {"params", {{"tol", -1}}}}}}}) ==
        "/experiments/0/params/tol");
  CHECK(field_of(json{{"experiments", {{{"kind", "residue"}, {"params", {{"bogus", 1}}}}}}}) ==
        "/experiments/0/params/bogus");
  CHECK(field_of(json{{"settings", {{"K", 4}}}}) == "/settings/K");
  CHECK(field_of(json{{"settings", {{"hbar_ladder", {0.1, 0.2, 0.05}}}}}) == "/settings/hbar_ladder");
  CHECK(field_of(json{{"extra", 1}}) == "/extra");
  CHECK(field_of(json{{"experiments", {{{"kind", "residue"}, {"id", "a"}}, {{"kind", "residue"}, {"id", "a"}}}}}) ==
        "/experiments/1/id");
  CHECK(field_of(json::object()) == "<none>");
}

TEST_CASE("defaults are filled from the schema") {
  const auto cfg = parse_suite_config(json{{"experiments", {{{"kind", "weyl_identities"}}}}});
  REQUIRE(cfg.experiments.size() == 1);
  CHECK(cfg.experiments[0].params["count"] == 20);
  CHECK(cfg.experiments[0].params["max_degree"] == 4);
  CHECK(cfg.experiments[0].id == "weyl_identities_0");
  CHECK(cfg.settings.K == 256);
}

TEST_CASE("syntax errors carry line and column") {
  const auto path = std::filesystem::temp_directory_path() / "fioindex_bad.json";
  std::ofstream(path) << "{\n  \"experiments\": [\n    {\"kind\": }\n  ]\n}\n";
  try {
    load_suite_config(path.string());
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("FIO declarations") {
  CHECK(parse_diffeo("sine:0.3")(1.0) == doctest::Approx(1.0 + 0.3 * std::sin(1.0)));
  CHECK(parse_diffeo("rotation:0.5")(1.0) == doctest::Approx(1.5));
  CHECK(parse_diffeo("x+0.2*sin(x)")(2.0) == doctest::Approx(2.0 + 0.2 * std::sin(2.0)));
  CHECK_THROWS(parse_diffeo("2*x"));
  try {
    build_fio(json{{"g_plus", "sine:abc"}}, 64, "/fio");
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "/fio/g_plus");
  }
  CHECK_THROWS_AS(build_fio(json{{"route", "other"}}, 64), ConfigError);
  CHECK_THROWS_AS(build_fio(json{{"h_plus", "1"}}, 64), ConfigError);
}

TEST_CASE("residue suite runs, reports and is reproducible") {
  const json cfg_json = {{"settings", {{"K", 128}}},
                         {"experiments",
                          {{{"kind", "residue"}, {"id", "res"}},
                           {{"kind", "residue"},
                            {"id", "wrong"},
                            {"params", {{"operators", {{{"symbol", "(1+xi^2)^(-0.5)"}, {"order", -1}, {"expected", 3}}}}}}}}}};
  const auto cfg = parse_suite_config(cfg_json);
  const RunReport a = run_suite(cfg), b = run_suite(cfg);
  REQUIRE(a.suites.size() == 2);
  CHECK(a.suites[0].pass());
  CHECK(!a.suites[1].pass());
  CHECK(!a.pass());

  json ja = report_to_json(a), jb = report_to_json(b);
  ja.erase("timing");
  jb.erase("timing");
  CHECK(ja == jb);
  CHECK(ja["summary"]["checks"] == 5);
  CHECK(ja["suites"][0]["checks"][0]["provenance"] == "exact");
  CHECK(ja["suites"][0]["checks"][0]["inputs_digest"].get<std::string>().size() == 16);

  const std::string csv = suite_csv(a.suites[0]);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);

  const auto dir = std::filesystem::temp_directory_path() / "fioindex_report";
  write_report(a, dir.string());
  CHECK(std::filesystem::exists(dir / "report.json"));
  CHECK(std::filesystem::exists(dir / "res.csv"));
}

TEST_CASE("failures inside a check are recorded") {
  const auto cfg = parse_suite_config(
      json{{"settings", {{"K", 64}}},
           {"experiments", {{{"kind", "residue"}, {"params", {{"operators", {{{"symbol", "foo(x)"}}}}}}}}}});
  const RunReport r = run_suite(cfg);
  REQUIRE(r.suites[0].checks.size() == 1);
  CHECK(!r.suites[0].checks[0].pass);
  CHECK(r.suites[0].checks[0].measured.contains("error"));
}

TEST_CASE("small weyl and index suites pass") {
  const auto cfg = parse_suite_config(json{
      {"settings", {{"K", 128}}},
      {"experiments",
       {{{"kind", "weyl_identities"}, {"params", {{"count", 4}}}},
        {{"kind", "index_match"}, {"params", {{"m_plus", {-1, 2}}, {"g_plus", {"sine:0.3"}}}}}}}});
  const RunReport r = run_suite(cfg);
  CHECK(r.suites[0].pass());
  CHECK(r.suites[1].pass());
  CHECK(r.suites[1].metadata["orientation"] == kIndexOrientation);
}
