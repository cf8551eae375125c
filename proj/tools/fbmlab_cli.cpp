// fbmlab: command-line front end for the regular-noise Euler-Maruyama lab.
//
// Exit codes: 0 success, 1 test failure, 2 configuration rejected,
// 3 numerical abort in a Monte Carlo sample.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "fbmlab/errors.hpp"
#include "fbmlab/experiment.hpp"
#include "fbmlab/parallel.hpp"
#include "fbmlab/selftest.hpp"

namespace fs = std::filesystem;
using namespace fbmlab;

namespace {

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::size_t threads = default_threads();
  std::string out_dir;
  bool print_config = false;
};

ExperimentConfig resolve(const Options& opt) {
  ExperimentConfig c = opt.config_path.empty() ? ExperimentConfig{} : load_config(opt.config_path);
  if (opt.seed) c.master_seed = *opt.seed;
  if (!opt.out_dir.empty()) c.output_dir = opt.out_dir;
  return c;
}

std::ofstream open_output(const ExperimentConfig& c, const std::string& name) {
  std::error_code ec;
  fs::create_directories(c.output_dir, ec);
  const fs::path file = fs::path(c.output_dir) / name;
  std::ofstream out(file);
  if (!out) throw ConfigError("cannot write " + file.string());
  return out;
}

int cmd_noise(const ExperimentConfig& c) {
  const auto h = run_noise(c);
  auto out = open_output(c, "noise.csv");
  write_noise_csv(out, h);
  std::cout << "noise: " << h.grid().points() << " rows, " << h.depth() << " levels -> "
            << (fs::path(c.output_dir) / "noise.csv").string() << '\n';
  return 0;
}

int cmd_rate(const ExperimentConfig& c, std::size_t threads) {
  const auto result = run_rate(c, threads);
  auto csv = open_output(c, "errors.csv");
  write_errors_csv(csv, result.report);
  auto summary = open_output(c, "rate_summary.json");
  summary << rate_summary_json(result.report);
  std::cout << rate_summary_json(result.report);
  return 0;
}

int cmd_optimality(const ExperimentConfig& c, std::size_t threads) {
  const auto result = run_optimality(c, threads);
  auto csv = open_output(c, "optimality.csv");
  write_optimality_csv(csv, result);
  const std::string summary = optimality_summary_json(c, result);
  auto json = open_output(c, "optimality_summary.json");
  json << summary;
  std::cout << summary;
  return 0;
}

int cmd_covcheck(const ExperimentConfig& c) {
  const auto rows = run_covcheck(c);
  auto csv = open_output(c, "covcheck.csv");
  write_covcheck_csv(csv, rows);
  write_covcheck_csv(std::cout, rows);
  const bool ok = covcheck_passed(rows);
  std::cout << (ok ? "covcheck passed\n" : "covcheck FAILED\n");
  return ok ? 0 : 1;
}

int cmd_selftest(const ExperimentConfig& c) {
  SelftestOptions opt;
  opt.seed = c.master_seed;
  const auto report = run_selftest(opt);
  std::cout << report.text();
  return report.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Euler-Maruyama lab for SDEs driven by regular fractional Brownian motion"};
  app.require_subcommand(0, 1);
  Options opt;
  app.add_option("--config", opt.config_path, "experiment config (JSON)");
  app.add_option("--seed", opt.seed, "master seed, overrides the config");
  app.add_option("--threads", opt.threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", opt.out_dir, "output directory, overrides the config");
  app.add_flag("--print-config", opt.print_config, "print the resolved config and exit");

  auto* noise = app.add_subcommand("noise", "dump one noise hierarchy to noise.csv");
  auto* rate = app.add_subcommand("rate", "strong-error rate study: errors.csv, rate_summary.json");
  auto* optimality = app.add_subcommand("optimality", "limit n(X - X^n) -> c: optimality.csv");
  auto* covcheck = app.add_subcommand("covcheck", "empirical fGn autocovariance check");
  auto* selftest = app.add_subcommand("selftest", "invariant suites of all modules");
  for (auto* sub : {noise, rate, optimality, covcheck, selftest}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.get_subcommands().empty() && !opt.print_config) {
      std::cerr << "a subcommand is required (noise, rate, optimality, covcheck, selftest)\n";
      return 2;
    }
    const ExperimentConfig config = resolve(opt);
    if (opt.print_config) {
      std::cout << serialize_config(config);
      return 0;
    }
    if (*noise) return cmd_noise(config);
    if (*rate) return cmd_rate(config, opt.threads);
    if (*optimality) return cmd_optimality(config, opt.threads);
    if (*covcheck) return cmd_covcheck(config);
    if (*selftest) return cmd_selftest(config);
  } catch (const ConfigError& e) {
    std::cerr << "configuration rejected: " << e.what() << '\n';
    return 2;
  } catch (const SampleAbort& e) {
    std::cerr << "numerical abort in sample " << e.sample() << " at step " << e.step() << ": "
              << e.what() << '\n';
    return 3;
  } catch (const NumericalError& e) {
    std::cerr << "numerical abort at step " << e.step() << ": " << e.what() << '\n';
    return 3;
  }
  return 2;
}
