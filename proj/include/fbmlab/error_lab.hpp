#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fbmlab/grid.hpp"
#include "fbmlab/solvers.hpp"

namespace fbmlab {

enum class Metric { sup_grid, lp_terminal, cp_half };

std::string to_string(Metric m);
/// Accepts "sup-grid", "Lp-terminal", "Cp-half"; throws ConfigError otherwise.
Metric parse_metric(const std::string& s);

/// Per-sample error of a coarse solution against the reference.
struct StrongErrorSample {
  double sup = 0.0;       // max over coarse gridpoints of |X_ref - X_n|
  double terminal = 0.0;  // |X_ref(1) - X_n(1)|
  SamplePath diff;        // X_ref - X_n at the coarse gridpoints
};

StrongErrorSample strong_error_sample(const EmSolution& ref, const EmSolution& em);

struct MomentEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

/// (mean v^p)^{1/p} with a delta-method standard error. Identical samples
/// return that value with zero error.
MomentEstimate lp_moment(std::span<const double> samples, double p);

/// Neumaier-compensated sum.
double compensated_sum(std::span<const double> values);

struct SeminormEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t first = 0;  // maximizing pair of grid indices
  std::size_t second = 0;
  std::size_t pairs = 0;  // pairs evaluated
};

/// Pairs (i, j), i < j, on a grid with n steps: all of them when there are
/// at most `budget`, otherwise an even stride through each dyadic gap band
/// [2^l, 2^{l+1}) with the budget split across bands. (0, n) is always kept.
std::vector<std::pair<std::size_t, std::size_t>> seminorm_pairs(std::size_t n, std::size_t budget);

inline constexpr std::size_t kDefaultPairBudget = 10000;

/// Grid-pair lower bound of sup_{r1 != r2} ||f(r1) - f(r2)||_{L^p} / |r1 - r2|^{1/2},
/// with one path per Monte Carlo sample. Throws ConfigError on grid mismatch.
SeminormEstimate cp_half_seminorm(std::span<const SamplePath> diffs, double p,
                                  std::size_t pair_budget = kDefaultPairBudget);

struct ErrorRecord {
  std::size_t n = 0;
  double p = 2.0;
  Metric metric = Metric::sup_grid;
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

/// Aggregates per-sample errors at one resolution. For Cp-half the record
/// holds the full norm: max over gridpoints of the L^p moment plus the
/// seminorm estimate.
ErrorRecord aggregate_errors(std::size_t n, Metric metric, double p,
                             std::span<const StrongErrorSample> samples,
                             std::size_t pair_budget = kDefaultPairBudget);

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double slope_std_error = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

struct RateReport {
  std::vector<ErrorRecord> records;
  bool exact = false;  // some estimate was zero; no fit
  LogLogFit fit;
};

/// OLS of log(estimate) on log(n) with a 95% t-interval for the slope.
/// Requires >= 3 records with strictly increasing n and one metric/p.
RateReport fit_rate(std::vector<ErrorRecord> records);

void write_errors_csv(std::ostream& out, const RateReport& report);
/// {"status": "fitted"|"exact", "slope", "intercept", "ci_low", "ci_high", "r_squared"}
std::string rate_summary_json(const RateReport& report);

enum class Verdict { confirmed, inconclusive };

const char* to_string(Verdict v);

struct PathVerdict {
  Verdict verdict = Verdict::inconclusive;
  bool eligible = false;  // |c(1)| >= min_abs_c
  bool monotone = false;
  double c_norm = 0.0;
  double final_relative_deviation = 0.0;
  std::vector<double> deviations;
};

inline constexpr double kMinAbsTerminalC = 0.05;

/// Confirmed iff |e_n(1) - c(1)| is non-increasing over the last three
/// doublings and the final deviation relative to max(|c(1)|, min_abs_c)
/// is at most `threshold`. Never reports a refutation.
PathVerdict optimality_verdict(std::span<const OptimalityRecord> records, double threshold,
                               double min_abs_c = kMinAbsTerminalC);

struct OptimalitySummary {
  std::size_t paths = 0;
  std::size_t eligible = 0;
  std::size_t confirmed_eligible = 0;
  std::size_t confirmed = 0;

  /// Confirmed fraction among eligible paths; 1 when every path has c(1) ~ 0
  /// and all of them are confirmed.
  double confirmed_fraction() const;
};

OptimalitySummary summarize(std::span<const PathVerdict> verdicts);

}  // namespace fbmlab
