// Command-line driver: run experiment suites from a JSON config, list and
// describe the registered kinds.

#include "fioindex/experiments.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

using namespace fioindex;

namespace {

std::vector<double> parse_ladder(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(std::stod(item));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semiclassical FIO index experiments"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "results", ladder;
  std::uint64_t seed = 0;
  int modes = 0, order = -1, jobs = 0;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "Run the experiments of a config file");
  run->add_option("--config,-c", config_path, "JSON config")->required();
  run->add_option("--out,-o", out_dir, "output directory for report.json and CSV files");
  run->add_option("--seed", seed, "override settings.seed");
  run->add_option("--modes,-K", modes, "override settings.K (lattice modes)");
  run->add_option("--hbar-ladder", ladder, "override settings.hbar_ladder, comma separated");
  run->add_option("--order", order, "override settings.order");
  run->add_option("--jobs,-j", jobs, "override settings.jobs");
  run->add_flag("--quiet,-q", quiet, "print only the summary line");

  auto* list = app.add_subcommand("list", "List experiment kinds");
  std::string kind;
  auto* describe = app.add_subcommand("describe", "Show the parameters of a kind");
  describe->add_option("kind", kind, "experiment kind")->required();

  CLI11_PARSE(app, argc, argv);

  if (*list) {
    for (const auto& k : experiment_catalog()) std::cout << k.name << "\t" << k.summary << "\n";
    return 0;
  }
  if (*describe) {
    try {
      const auto& k = find_experiment(kind, "kind");
      std::cout << k.name << "\n  " << k.summary << "\n  exercises: " << k.anchor << "\n  parameters:\n";
      for (const auto& [name, spec] : k.schema.items())
        std::cout << "    " << name << " (" << spec["type"].get<std::string>() << ", default "
                  << spec["default"].dump() << "): " << spec["doc"].get<std::string>() << "\n";
      return 0;
    } catch (const ConfigError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 2;
    }
  }

  SuiteConfig cfg;
  try {
    cfg = load_suite_config(config_path);
    if (run->count("--seed")) cfg.settings.seed = seed;
    if (run->count("--modes")) {
      if (modes < 8) throw ConfigError("--modes", "expected an integer >= 8");
      cfg.settings.K = modes;
    }
    if (run->count("--order")) {
      if (order < 0) throw ConfigError("--order", "expected a non-negative integer");
      cfg.settings.order = order;
    }
    if (run->count("--jobs")) {
      if (jobs < 1) throw ConfigError("--jobs", "expected a positive integer");
      cfg.settings.jobs = jobs;
    }
    if (run->count("--hbar-ladder")) {
      try {
        cfg.settings.hbar_ladder = parse_ladder(ladder);
      } catch (const std::exception&) {
        throw ConfigError("--hbar-ladder", "expected comma-separated numbers");
      }
      const auto& h = cfg.settings.hbar_ladder;
      if (h.size() < 3) throw ConfigError("--hbar-ladder", "need at least 3 values");
      for (std::size_t i = 0; i < h.size(); ++i)
        if (!(h[i] > 0) || (i > 0 && !(h[i] < h[i - 1])))
          throw ConfigError("--hbar-ladder", "values must be positive and strictly decreasing");
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  const RunReport report = run_suite(cfg);
  try {
    write_report(report, out_dir);
  } catch (const std::exception& e) {
    std::cerr << "cannot write report: " << e.what() << "\n";
    return 2;
  }
  std::size_t total = 0, failed = 0;
  for (const auto& s : report.suites) {
    for (const auto& r : s.checks) {
      ++total;
      if (!r.pass) ++failed;
      if (!quiet && !r.pass) std::cout << "FAIL " << s.id << "/" << r.name << " " << r.measured.dump() << "\n";
    }
    if (!quiet) std::cout << (s.pass() ? "pass " : "FAIL ") << s.id << " (" << s.checks.size() << " checks)\n";
  }
  std::cout << total - failed << "/" << total << " checks passed; report in " << out_dir << "\n";
  return failed == 0 ? 0 : 1;
}
