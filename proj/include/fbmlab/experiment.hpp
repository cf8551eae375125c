#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "fbmlab/drift.hpp"
#include "fbmlab/error_lab.hpp"
#include "fbmlab/lift.hpp"
#include "fbmlab/noise.hpp"

namespace fbmlab {

/// Experiment configuration; serialized as a JSON object with the same keys.
struct ExperimentConfig {
  double H = 1.5;
  std::size_t d = 1;
  DriftSpec drift{"capped_holder", {{"alpha", 0.8}}};
  std::vector<double> x0{0.0};
  std::vector<double> x0n{0.0};
  std::vector<std::size_t> n_list{16, 32, 64, 128, 256};
  std::size_t n_ref = 4096;
  std::size_t samples = 200;
  double p = 2.0;
  std::uint64_t master_seed = 20240917;
  Metric metric = Metric::sup_grid;
  std::string output_dir = ".";
  double threshold = 0.2;         // optimality: final relative deviation
  double min_abs_c = kMinAbsTerminalC;
  std::size_t pair_budget = kDefaultPairBudget;
  std::size_t max_lag = 5;        // covcheck

  bool operator==(const ExperimentConfig&) const = default;
};

/// Parses a JSON document; missing keys keep their defaults, unknown keys
/// and malformed values throw ConfigError.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
std::string serialize_config(const ExperimentConfig& config);

enum class Command { noise, rate, optimality, covcheck };

/// Throws ConfigError naming the violated constraint.
void validate_config(const ExperimentConfig& config, Command command);

/// A Monte Carlo sample aborted on a non-finite value (CLI exit code 3).
class SampleAbort : public std::runtime_error {
 public:
  SampleAbort(const std::string& what, std::size_t sample, std::size_t step)
      : std::runtime_error(what), sample_(sample), step_(step) {}
  std::size_t sample() const noexcept { return sample_; }
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t sample_;
  std::size_t step_;
};

/// Noise hierarchy of sample 0 on the n_ref grid.
NoiseHierarchy run_noise(const ExperimentConfig& config);
void write_noise_csv(std::ostream& out, const NoiseHierarchy& hierarchy);

/// Strong errors against the shared-noise reference for every n in n_list.
struct RateResult {
  RateReport report;
  /// samples_by_n[j][s]: sample s at resolution n_list[j].
  std::vector<std::vector<StrongErrorSample>> samples_by_n;
};

RateResult run_rate(const ExperimentConfig& config, std::size_t threads);

struct OptimalityPath {
  std::vector<OptimalityRecord> records;
  PathVerdict verdict;
};

struct OptimalityResult {
  std::vector<OptimalityPath> paths;
  OptimalitySummary summary;
};

OptimalityResult run_optimality(const ExperimentConfig& config, std::size_t threads);
/// Columns: path,n,e_n_1..e_n_d,c_1..c_d,deviation,verdict; values at t = 1.
void write_optimality_csv(std::ostream& out, const OptimalityResult& result);
/// {"verdict", "paths", "eligible", "confirmed_eligible", "confirmed_fraction", ...}
std::string optimality_summary_json(const ExperimentConfig& config, const OptimalityResult& result);
/// Fraction of eligible paths that must be confirmed.
inline constexpr double kOptimalityConfirmFraction = 0.8;

/// fGn autocovariance check at lags 0..max_lag for the fractional part of H,
/// N = n_ref steps and `samples` draws.
std::vector<AutocovarianceRow> run_covcheck(const ExperimentConfig& config);
void write_covcheck_csv(std::ostream& out, const std::vector<AutocovarianceRow>& rows);
inline constexpr double kCovcheckZLimit = 4.0;
bool covcheck_passed(const std::vector<AutocovarianceRow>& rows);

}  // namespace fbmlab
