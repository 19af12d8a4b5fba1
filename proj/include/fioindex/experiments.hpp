#pragma once

#include "fioindex/fio.hpp"
#include "fioindex/formal_series.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fioindex {

/// Configuration error naming the offending field (a JSON pointer such as
/// "/experiments/0/params/m_plus").
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct RunSettings {
  int K = 256;
  std::vector<double> hbar_ladder = default_hbar_ladder();
  int order = 3;
  std::uint64_t seed = 1;
  int jobs = 1;
};

struct ExperimentConfig {
  std::string id;
  std::string kind;
  nlohmann::json params = nlohmann::json::object();
};

struct SuiteConfig {
  RunSettings settings;
  std::vector<ExperimentConfig> experiments;
};

/// How an expected value was obtained: "exact" (closed form), "oracle"
/// (independent computation) or "reference" (published value).
struct CheckRecord {
  std::string name;
  nlohmann::json inputs = nlohmann::json::object();
  nlohmann::json measured = nlohmann::json::object();
  nlohmann::json expected = nlohmann::json::object();
  std::string provenance = "oracle";
  bool pass = false;
  double runtime = 0;  ///< seconds; reported only in the timing section

  std::string inputs_digest() const;
};

struct SuiteReport {
  std::string id;
  std::string kind;
  std::vector<CheckRecord> checks;
  nlohmann::json metadata = nlohmann::json::object();

  bool pass() const;
};

struct RunReport {
  RunSettings settings;
  std::vector<SuiteReport> suites;
  std::string generated_at;  ///< the only time-dependent field besides timings

  bool pass() const;
};

struct ExperimentKind {
  std::string name;
  std::string summary;
  std::string anchor;  ///< the result the suite exercises
  nlohmann::json schema;  ///< parameter name -> {type, default, doc}
  std::function<SuiteReport(const ExperimentConfig&, const RunSettings&)> run;
};

/// The six registered kinds: star_product, egorov, index_match,
/// weyl_identities, trace_space, residue.
const std::vector<ExperimentKind>& experiment_catalog();
/// Throws ConfigError on unknown names.
const ExperimentKind& find_experiment(const std::string& name, const std::string& field = "/kind");

/// Validates and fills defaults. Unknown parameters are rejected.
SuiteConfig parse_suite_config(const nlohmann::json& j);
/// Reads JSON from disk; syntax errors are reported with line and column.
SuiteConfig load_suite_config(const std::string& path);

/// Experiments run in a pool of settings.jobs workers; reports are kept in
/// config order. Failures inside a check are recorded, not thrown.
RunReport run_suite(const SuiteConfig& config);

nlohmann::json report_to_json(const RunReport& report);
/// One row per check: suite, check, provenance, pass, digest, measured, expected.
std::string suite_csv(const SuiteReport& suite);
/// Writes report.json and <suite id>.csv under out_dir.
void write_report(const RunReport& report, const std::string& out_dir);

/// Circle diffeomorphism from a config string: "id", "sine:<eps>[:<phase>]",
/// "rotation:<c>", "flow:<expr>" or an expression for g(x).
CircleDiffeo parse_diffeo(const std::string& text);

/// Clutched or ODE-route FIO from a JSON declaration.
FourierIntegralOperator build_fio(const nlohmann::json& decl, int K, const std::string& field = "");

}  // namespace fioindex
