// verify --suite <name> --config <path> [--seed N] [--samples N] [--out DIR] [--format json|csv]
// Exit codes: 0 all checks pass, 1 a check failed, 2 usage or configuration error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "obv/suite.hpp"

namespace {

int run(int argc, char** argv) {
  CLI::App app{"Run a verification suite and emit a report"};
  std::string suite, config, out, format;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  app.add_option("--suite", suite, "g1_s3, g2_s3, g2_s5, disk_hypersurface, subcritical, prelag, or all");
  app.add_option("--config", config, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "base seed");
  app.add_option("--samples", samples, "sample count for contact and adapted checks");
  app.add_option("--out", out, "output directory");
  app.add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  obv::SuiteConfig cfg;
  try {
    if (!config.empty()) cfg = obv::load_config(config);
    if (!suite.empty()) cfg.suite = suite;
    if (seed) cfg.seed = *seed;
    if (samples) cfg.samples = *samples;
    if (!out.empty()) cfg.out = out;
    if (!format.empty()) cfg.format = format;
    if (suite.empty() && config.empty()) throw obv::ConfigError("either --suite or --config must name a suite");
    cfg.validate();
  } catch (const obv::ConfigError& e) {
    std::cerr << "verify: " << e.what() << "\n";
    return 2;
  }

  const auto reports = obv::run_suite(cfg);
  for (const auto& r : reports) {
    std::fprintf(stderr, "%s  %-70s  %8.1f ms\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.wall_time_ms);
    for (const auto& f : r.failures) std::fprintf(stderr, "      %s\n", f.c_str());
  }
  try {
    if (!cfg.out.empty()) {
      for (const auto& p : obv::emit_report(cfg, reports, cfg.out, cfg.format)) std::cerr << "wrote " << p.string() << "\n";
    } else if (cfg.format == "json") {
      std::cout << obv::reports_to_json(cfg, reports).dump(2) << "\n";
    } else {
      std::cout << obv::summary_csv(reports);
    }
  } catch (const std::exception& e) {
    std::cerr << "verify: " << e.what() << "\n";
    return 2;
  }
  return obv::all_pass(reports) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
