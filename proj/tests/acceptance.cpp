// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "fbmlab/error_lab.hpp"
#include "fbmlab/experiment.hpp"
#include "fbmlab/lift.hpp"
#include "fbmlab/noise.hpp"
#include "fbmlab/parallel.hpp"
#include "fbmlab/solvers.hpp"
#include "oracles.hpp"

using namespace fbmlab;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& name, const std::string& detail) {
  std::printf("%s #%d %s: %s\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

void info(const std::string& text) {
  std::printf("     %s\n", text.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void rate_criterion(std::size_t threads) {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig c;
  c.H = 1.5;
  c.d = 1;
  c.drift = {"capped_holder", {{"alpha", 0.8}}};
  c.x0 = {0.0};
  c.x0n = {0.0};
  c.n_list = {16, 32, 64, 128, 256};
  c.n_ref = 4096;
  c.samples = 200;
  c.p = 2.0;
  c.metric = Metric::sup_grid;
  validate_config(c, Command::rate);
  const auto r = run_rate(c, threads);
  const auto& f = r.report.fit;
  const bool ok = !r.report.exact && f.slope >= -1.25 && f.slope <= -0.80 && f.r_squared >= 0.97;
  report(1, ok, "strong rate",
         fmt("slope %.4f (want [-1.25, -0.80]), r2 %.5f (want >= 0.97), CI [%.4f, %.4f]", f.slope,
             f.r_squared, f.ci_low, f.ci_high) +
             fmt(", %.1f s", seconds_since(t0)));
}

void optimality_criterion(std::size_t threads) {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig c;
  c.H = 1.5;
  c.d = 1;
  c.drift = {"sin", {{"a", 1.0}}};
  c.samples = 50;
  c.n_list = {64, 128, 256, 512};
  c.n_ref = 8192;
  c.threshold = 0.2;
  c.min_abs_c = 0.05;
  validate_config(c, Command::optimality);
  const auto r = run_optimality(c, threads);
  const auto& s = r.summary;
  const double frac = s.confirmed_fraction();
  report(2, frac >= kOptimalityConfirmFraction, "optimality limit",
         fmt("confirmed on %.0f of %.0f eligible paths (%.1f%%, want >= 80%%)", s.confirmed_eligible,
             s.eligible, 100.0 * frac) +
             fmt(", %.1f s", seconds_since(t0)));

  std::size_t monotone = 0, within = 0;
  double worst_rel = 0.0;
  std::vector<double> mean_dev(c.n_list.size(), 0.0);
  for (const auto& p : r.paths) {
    if (!p.verdict.eligible) continue;
    monotone += p.verdict.monotone;
    within += p.verdict.final_relative_deviation <= c.threshold;
    worst_rel = std::max(worst_rel, p.verdict.final_relative_deviation);
    for (std::size_t i = 0; i < mean_dev.size(); ++i) mean_dev[i] += p.verdict.deviations[i] / s.eligible;
  }
  info(fmt("paths within the relative threshold: %.0f of %.0f (worst %.4f); monotone: %.0f", within,
           s.eligible, worst_rel, monotone));
  std::vector<double> x, y;
  std::string means = "mean |e_n(1) - c(1)| by n:";
  for (std::size_t i = 0; i < mean_dev.size(); ++i) {
    x.push_back(std::log(static_cast<double>(c.n_list[i])));
    y.push_back(std::log(mean_dev[i]));
    means += fmt(" %.3g", mean_dev[i]);
  }
  info(means + fmt(" (log-log slope %.3f)", oracle::ols_slope(x, y)));
}

void noise_law_criterion() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst_z = 0.0;
  for (double frac : {0.25, 0.5, 0.75}) {
    const auto rows = autocovariance_check(frac, 1024, 10000, 5, RngSpec{101});
    for (const auto& row : rows) {
      const double want = oracle::fgn_autocov(frac, row.lag, 1.0 / 1024);
      worst_z = std::max(worst_z, std::abs(row.empirical - want) / row.std_error);
    }
  }

  const double third =
      oracle::double_integral([](double u, double v) { return std::min(u, v); }, 0, 1, 0, 1, 400);
  const std::size_t paths = 10000, n = 4096;
  std::vector<double> lifted(paths), exact(paths);
  for (std::size_t r = 0; r < paths; ++r) {
    const auto h = lift(fbm_path(HurstParams(1.5), UniformGrid(n), 1, RngSpec{102}, r), 1);
    lifted[r] = h.top()(n, 0) * h.top()(n, 0);
    const auto wi = exact_integrated_bm(UniformGrid(16), 1, RngSpec{103}, r).second;
    exact[r] = wi(16, 0) * wi(16, 0);
  }
  const auto ml = oracle::mean_se(lifted), me = oracle::mean_se(exact);
  const double zl = std::abs(ml.mean - third) / ml.se;
  const double ze = std::abs(me.mean - third) / me.se;
  const double zd = std::abs(ml.mean - me.mean) / std::hypot(ml.se, me.se);
  report(3, worst_z <= 4.0 && zl <= 4.0 && ze <= 4.0 && zd <= 4.0, "noise law",
         fmt("max |z| fGn lags 0..5 = %.2f; lift Var(B_1) = %.4f (z %.2f vs 1/3), ", worst_z, ml.mean, zl) +
             fmt("integrated BM %.4f (z %.2f), lift vs integrated BM z %.2f", me.mean, ze, zd) +
             fmt(", %.1f s", seconds_since(t0)));
}

void exactness_criterion(std::size_t threads) {
  bool bitwise = true;
  const HurstParams params(1.5);
  const auto drift = make_drift({"constant", {{"value", 1.0}}}, 1);
  for (std::uint64_t r = 0; r < 20; ++r) {
    const auto h = lift(fbm_path(params, UniformGrid(4096), 1, RngSpec{104}, r), 1);
    const NoiseProvenance prov{104, r, 1.5, false};
    const auto ref = reference_solution(drift, std::vector<double>{0.0}, h, 4096, prov);
    for (std::size_t n : {16u, 32u, 64u, 128u, 256u}) {
      const auto em = euler_maruyama(drift, std::vector<double>{0.0}, restrict(h.top(), n), prov);
      bitwise = bitwise && restrict(ref.path, n) == em.path;
    }
  }

  ExperimentConfig c;
  c.drift = {"zero", {}};
  c.x0 = {0.3};
  c.x0n = {0.1};
  c.samples = 50;
  const double gap = std::abs(c.x0[0] - c.x0n[0]);
  bool gap_exact = true;
  for (auto metric : {Metric::sup_grid, Metric::lp_terminal, Metric::cp_half})
    for (double p : {1.0, 2.0, 3.0}) {
      c.metric = metric;
      c.p = p;
      for (const auto& rec : run_rate(c, threads).report.records) gap_exact = gap_exact && rec.estimate == gap;
    }
  report(4, bitwise && gap_exact, "exactness identities",
         std::string("constant drift bitwise after restriction: ") + (bitwise ? "yes" : "no") +
             "; zero drift error == |x0 - x0n| for all metrics and p: " + (gap_exact ? "yes" : "no"));
}

struct BoundEstimate {
  double max_ratio = 0.0, max_se = 0.0, min_ratio = 0.0, min_se = 0.0;
  double spread() const { return max_ratio / min_ratio; }
  double spread_se() const {
    return spread() * std::hypot(max_se / max_ratio, min_se / min_ratio);
  }
};

// E|B_t - B_s| / |t - s| over all pairs of the 1/256 grid from samples
// [first, first + m) of the lifted noise.
BoundEstimate holder_bound(std::size_t first, std::size_t m) {
  const std::size_t fine = 4096, n = 256;
  std::vector<std::vector<double>> paths(m);
  parallel_for(m, default_threads(), [&](std::size_t i) {
    const auto h = lift(fbm_path(HurstParams(1.5), UniformGrid(fine), 1, RngSpec{105}, first + i), 1);
    paths[i] = restrict(h.top(), n).component(0);
  });
  BoundEstimate b;
  b.min_ratio = INFINITY;
  std::vector<double> v(m);
  for (std::size_t i = 0; i <= n; ++i)
    for (std::size_t j = i + 1; j <= n; ++j) {
      const double gap = static_cast<double>(j - i) / n;
      for (std::size_t r = 0; r < m; ++r) v[r] = std::abs(paths[r][j] - paths[r][i]) / gap;
      const auto ms = oracle::mean_se(v);
      if (ms.mean > b.max_ratio) b.max_ratio = ms.mean, b.max_se = ms.se;
      if (ms.mean < b.min_ratio) b.min_ratio = ms.mean, b.min_se = ms.se;
    }
  return b;
}

void holder_criterion() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t m = 2000;
  const auto a = holder_bound(0, m);
  const auto b = holder_bound(m, 2 * m);
  const bool finite = std::isfinite(a.spread()) && std::isfinite(b.spread()) && a.min_ratio > 0.0;
  const double z_max = std::abs(a.max_ratio - b.max_ratio) / std::hypot(a.max_se, b.max_se);
  const double z_spread = std::abs(a.spread() - b.spread()) / std::hypot(a.spread_se(), b.spread_se());
  report(5, finite && z_max <= 3.0 && z_spread <= 3.0, "Hölder moment bound",
         fmt("sup E|dB|/|dt| = %.4f (M) vs %.4f (2M), z %.2f; ", a.max_ratio, b.max_ratio, z_max) +
             fmt("max/min = %.2f vs %.2f, z %.2f", a.spread(), b.spread(), z_spread) +
             fmt(", %.1f s", seconds_since(t0)));
}

void orders_criterion() {
  std::vector<double> logn, logerr;
  for (std::size_t n = 16; n <= 1024; n *= 2) {
    SamplePath square(UniformGrid(n), 1);
    for (std::size_t i = 0; i <= n; ++i) square(i, 0) = std::pow(square.grid().gridpoint(i), 2);
    const auto h = lift(square, 1);
    logn.push_back(std::log(n));
    logerr.push_back(std::log(std::abs(h.top()(n, 0) - 1.0 / 3.0)));
  }
  const double lift_slope = oracle::ols_slope(logn, logerr);

  const auto sin_drift = make_drift({"sin", {{"a", 1.0}}}, 1);
  auto solve = [&](std::size_t n) {
    SamplePath x(UniformGrid(n), 1), v(UniformGrid(n), 1);
    for (std::size_t i = 0; i <= n; ++i) {
      const double t = x.grid().gridpoint(i);
      x(i, 0) = std::sin(3 * t) + 0.5 * t;
      v(i, 0) = std::cos(5 * t);
    }
    return optimality_ode(sin_drift, x, v);
  };
  double min_ratio = INFINITY, previous = 0.0;
  for (std::size_t n = 16; n <= 512; n *= 2) {
    const auto coarse = solve(n);
    const auto fine = restrict(solve(2 * n), n / 2);
    double gap = 0.0;
    for (std::size_t k = 0; k <= n / 2; ++k) gap = std::max(gap, std::abs(coarse(k, 0) - fine(k, 0)));
    if (previous > 0.0) min_ratio = std::min(min_ratio, previous / gap);
    previous = gap;
  }

  const auto tanh_drift = make_drift({"tanh", {{"lambda", 1.0}}}, 1);
  const double exact = std::asinh(std::sinh(1.0) * std::exp(1.0));
  std::vector<double> en, ee;
  for (std::size_t n = 16; n <= 1024; n *= 2) {
    const auto sol = euler_maruyama(tanh_drift, std::vector<double>{1.0}, SamplePath(UniformGrid(n), 1),
                                    NoiseProvenance{0, 0, 1.5, true});
    en.push_back(std::log(n));
    ee.push_back(std::log(std::abs(sol.path(n, 0) - exact)));
  }
  const double euler_slope = oracle::ols_slope(en, ee);
  const bool ok = std::abs(lift_slope + 2.0) <= 0.05 && min_ratio >= 8.0 && std::abs(euler_slope + 1.0) <= 0.05;
  report(6, ok, "quadrature and ODE orders",
         fmt("trapezoid slope %.4f (want -2), c-ODE min refinement ratio %.1f (want >= 8), "
             "Euler slope %.4f (want -1 +- 0.05)",
             lift_slope, min_ratio, euler_slope));
}

}  // namespace

int main() {
  const std::size_t threads = default_threads();
  rate_criterion(threads);
  optimality_criterion(threads);
  noise_law_criterion();
  exactness_criterion(threads);
  holder_criterion();
  orders_criterion();
  std::printf("%d of 6 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
