#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fbmlab {

struct SelftestOptions {
  std::uint64_t seed = 7;
  /// Negative control: the covariance suite samples from a perturbed
  /// covariance while checking against the true one, so it must fail.
  bool mutate_covariance = false;
};

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::vector<std::string> failures;
  std::size_t checks = 0;
};

struct SelftestReport {
  std::vector<SuiteResult> suites;

  bool passed() const;
  /// One line per suite plus one per failure; deterministic for a seed.
  std::string text() const;
};

/// Quick invariant suites for every module: covcheck, embedding, lift,
/// drift, solvers, error-lab.
SelftestReport run_selftest(const SelftestOptions& options = {});

}  // namespace fbmlab
