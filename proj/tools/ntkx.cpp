// Command-line front end: ntkx <subcommand> --config PATH [--out PATH] [--seed N] [--threads N]

#include "ntkx/config.hpp"
#include "ntkx/errors.hpp"
#include "ntkx/parallel.hpp"
#include "ntkx/runner.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

int main(int argc, char** argv) {
  CLI::App app{"Neural tangent kernel extrapolation experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  std::size_t threads = 1;

  for (auto name : ntkx::subcommand_names()) {
    auto* sub = app.add_subcommand(std::string(name));
    sub->add_option("--config", config_path, "Scenario JSON")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_path, "CSV output (default: config 'output', else stdout)");
    sub->add_option("--seed", seed, "Overrides the config seed");
    sub->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  }
  CLI11_PARSE(app, argc, argv);
  const std::string sub = app.get_subcommands().front()->get_name();

  ntkx::ScenarioConfig cfg;
  try {
    cfg = ntkx::load_config(config_path);
    if (seed) cfg.seed = *seed;
  } catch (const ntkx::Error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  }
  ntkx::parallel::set_threads(threads);

  ntkx::Report report;
  try {
    report = ntkx::run_subcommand(sub, cfg);
  } catch (const ntkx::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << sub << ": " << e.what() << '\n';
    return 2;
  }

  const std::string path = out_path.empty() ? cfg.output : out_path;
  if (path.empty() || path == "-") {
    ntkx::write_csv(std::cout, report);
  } else {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
      std::cerr << "cannot write '" << path << "'\n";
      return 1;
    }
    ntkx::write_csv(out, report);
  }

  std::size_t failed = 0;
  for (const auto& r : report.rows) failed += !r.ok();
  if (failed) {
    std::cerr << sub << ": " << failed << " of " << report.rows.size() << " cells failed\n";
    return 2;
  }
  return 0;
}
