#include "fbmlab/selftest.hpp"

#include <cmath>
#include <functional>
#include <sstream>

#include "fbmlab/drift.hpp"
#include "fbmlab/error_lab.hpp"
#include "fbmlab/grid.hpp"
#include "fbmlab/lift.hpp"
#include "fbmlab/noise.hpp"
#include "fbmlab/solvers.hpp"

namespace fbmlab {

namespace {

class Suite {
 public:
  explicit Suite(std::string name) { result_.name = std::move(name); }

  void check(bool ok, const std::string& what) {
    ++result_.checks;
    if (!ok) result_.failures.push_back(what);
  }

  void near(double got, double want, double tol, const std::string& what) {
    std::ostringstream msg;
    msg.precision(17);
    msg << what << ": got " << got << ", want " << want << " +- " << tol;
    check(std::abs(got - want) <= tol, msg.str());
  }

  SuiteResult finish() && {
    result_.passed = result_.failures.empty();
    return std::move(result_);
  }

 private:
  SuiteResult result_;
};

SuiteResult covcheck_suite(const SelftestOptions& opt) {
  Suite s("covcheck");
  const std::size_t steps = 128;
  const double dt = 1.0 / static_cast<double>(steps);
  for (double frac : {0.3, 0.7}) {
    const double sampled_frac = opt.mutate_covariance ? frac + 0.15 : frac;
    const auto sampled = fgn_autocovariance_vector(sampled_frac, steps, dt);
    const auto rows = autocovariance_check(frac, sampled, 2000, 3, RngSpec{opt.seed});
    for (const auto& r : rows) {
      std::ostringstream msg;
      msg.precision(6);
      msg << "frac " << frac << " lag " << r.lag << " z = " << r.z_score();
      s.check(std::abs(r.z_score()) <= 4.0, msg.str());
    }
  }
  return std::move(s).finish();
}

SuiteResult embedding_suite() {
  Suite s("embedding");
  for (double frac : {0.1, 0.25, 0.5, 0.75, 0.9}) {
    for (std::size_t steps : {100u, 1024u}) {
      const auto spectrum =
          circulant_embedding_spectrum(fgn_autocovariance_vector(frac, steps, 1.0 / steps));
      double lo = spectrum[0];
      for (double v : spectrum) lo = std::min(lo, v);
      s.check(lo >= 0.0, "negative embedding eigenvalue for frac " + std::to_string(frac));
    }
    for (std::size_t lag : {0u, 3u, 12u}) {
      const double g1 = fgn_autocovariance(frac, lag, 0.01);
      if (g1 == 0.0) continue;
      const double g2 = fgn_autocovariance(frac, lag, 0.02);
      s.near(g2 / g1, std::pow(2.0, 2.0 * frac), 1e-12 * std::pow(2.0, 2.0 * frac), "self-similar scaling");
    }
  }
  return std::move(s).finish();
}

SuiteResult lift_suite() {
  Suite s("lift");
  const UniformGrid grid(100);
  SamplePath ones(grid, 1);
  SamplePath square(grid, 1);
  for (std::size_t i = 0; i <= 100; ++i) {
    ones(i, 0) = 1.0;
    square(i, 0) = grid.gridpoint(i) * grid.gridpoint(i);
  }
  const auto h = lift(ones, 2, BaseOrigin::any);
  double worst = 0.0;
  for (std::size_t i = 0; i <= 100; ++i) {
    const double t = grid.gridpoint(i);
    worst = std::max({worst, std::abs(h.levels()[0](i, 0) - t), std::abs(h.levels()[1](i, 0) - t * t / 2)});
  }
  s.near(worst, 0.0, 1e-14, "constant base lifts to t, t^2/2");
  const auto cube = lift(square, 1);
  double err = 0.0;
  for (std::size_t i = 0; i <= 100; ++i) {
    const double t = grid.gridpoint(i);
    err = std::max(err, std::abs(cube.top()(i, 0) - t * t * t / 3));
  }
  s.check(err <= 1.7e-5, "trapezoid error on s^2 within dt^2 t / 6");
  s.check(&derivative_of_top(h) == &h.levels()[0], "derivative of top is the level below");
  return std::move(s).finish();
}

SuiteResult drift_suite(const SelftestOptions& opt) {
  Suite s("drift");
  auto engine = make_engine(RngSpec{opt.seed}, 1);
  std::uniform_real_distribution<double> box(-1000.0, 1000.0);
  const DriftSpec specs[] = {{"zero", {}},
                             {"constant", {{"value", 0.5}}},
                             {"capped_holder", {{"alpha", 0.8}}},
                             {"sin", {{"a", 1.0}}},
                             {"tanh", {{"lambda", 1.0}}}};
  double x[1], y[1], b[1], bm[1], jac[1];
  for (const auto& spec : specs) {
    const Drift drift = make_drift(spec, 1);
    for (int k = 0; k < 200; ++k) {
      x[0] = box(engine);
      drift.eval(x, b);
      s.check(std::abs(b[0]) <= drift.bound, drift.name + " exceeds its bound");
      if (drift.has_gradient()) {
        const double eps = 1e-5;
        y[0] = x[0] + eps;
        drift.eval(y, bm);
        (*drift.gradient)(x, jac);
        s.check(std::abs(bm[0] - b[0] - eps * jac[0]) <= 1e-9, drift.name + " gradient mismatch");
      }
    }
  }
  const Drift capped = make_drift(specs[2], 1);
  s.check(!admissible(make_drift({"capped_holder", {{"alpha", 0.5}}}, 1), 1.5), "gate rejects alpha 0.5 at H 1.5");
  s.check(admissible(capped, 1.5), "gate accepts alpha 0.8 at H 1.5");
  auto cert_engine = make_engine(RngSpec{opt.seed}, 2);
  s.check(holder_certificate(capped, 0.8, 2000, cert_engine) <= std::pow(2.0, 0.2) + 1e-9,
          "capped_holder certificate within 2^0.2");
  return std::move(s).finish();
}

SuiteResult solvers_suite() {
  Suite s("solvers");
  const NoiseProvenance synthetic{0, 0, 1.5, true};
  const double x0[] = {1.0};
  const SamplePath zero_noise(UniformGrid(4), 1);
  const auto lin = euler_maruyama(make_linear_test_drift(-1.0, 1), x0, zero_noise, synthetic,
                                  GateMode::unchecked);
  s.near(lin.path(4, 0), 0.31640625, 0.0, "zero-noise Euler for b(x) = -x");

  SamplePath noise(UniformGrid(64), 1);
  for (std::size_t i = 0; i <= 64; ++i) noise(i, 0) = std::sin(7.0 * static_cast<double>(i) / 64.0);
  const auto constant = make_drift({"constant", {{"value", 1.0}}}, 1);
  const auto fine = euler_maruyama(constant, x0, noise, synthetic);
  const auto coarse = euler_maruyama(constant, x0, restrict(noise, 16), synthetic);
  bool bitwise = true;
  for (std::size_t k = 0; k <= 16; ++k) bitwise &= fine.path(4 * k, 0) == coarse.path(k, 0);
  s.check(bitwise, "constant drift scheme equals the fine solution bitwise");

  // Deterministic Euler for x' = tanh(x) against the exact flow asinh(sinh(1) e^t).
  const double exact = std::asinh(std::sinh(1.0) * std::exp(1.0));
  const auto tanh_drift = make_drift({"tanh", {{"lambda", 1.0}}}, 1);
  std::vector<ErrorRecord> records;
  for (std::size_t n = 16; n <= 1024; n *= 2) {
    const auto sol = euler_maruyama(tanh_drift, x0, SamplePath(UniformGrid(n), 1), synthetic);
    records.push_back({n, 1.0, Metric::lp_terminal, std::abs(sol.path(n, 0) - exact), 0.0, 1});
  }
  const auto rate = fit_rate(records);
  s.near(rate.fit.slope, -1.0, 0.05, "zero-noise Euler slope");
  return std::move(s).finish();
}

SuiteResult error_lab_suite() {
  Suite s("error-lab");
  const double threes[] = {3.0, 3.0, 3.0};
  s.near(lp_moment(threes, 2.5).estimate, 3.0, 0.0, "lp_moment of constant samples");
  const double pair[] = {0.0, 2.0};
  s.near(lp_moment(pair, 2.0).estimate, std::sqrt(2.0), 1e-15, "lp_moment {0, 2}");

  const UniformGrid grid(16);
  SamplePath linear(grid, 1), root(grid, 1);
  for (std::size_t i = 0; i <= 16; ++i) {
    linear(i, 0) = grid.gridpoint(i);
    root(i, 0) = std::sqrt(grid.gridpoint(i));
  }
  s.near(cp_half_seminorm(std::span(&linear, 1), 2.0).estimate, 1.0, 1e-14, "seminorm of f(t) = t");
  s.near(cp_half_seminorm(std::span(&root, 1), 2.0).estimate, 1.0, 1e-14, "seminorm of f(t) = sqrt(t)");

  std::vector<ErrorRecord> records;
  for (std::size_t n : {16u, 32u, 64u}) records.push_back({n, 2.0, Metric::sup_grid, 1.0 / n, 0.0, 2});
  const auto fit = fit_rate(records);
  s.near(fit.fit.slope, -1.0, 1e-12, "slope of 1/n");
  s.near(fit.fit.r_squared, 1.0, 1e-12, "r^2 of 1/n");
  return std::move(s).finish();
}

}  // namespace

bool SelftestReport::passed() const {
  for (const auto& s : suites)
    if (!s.passed) return false;
  return true;
}

std::string SelftestReport::text() const {
  std::ostringstream out;
  for (const auto& s : suites) {
    out << (s.passed ? "PASS " : "FAIL ") << s.name << " (" << s.checks << " checks)\n";
    for (const auto& f : s.failures) out << "  - " << f << '\n';
  }
  out << (passed() ? "selftest passed\n" : "selftest FAILED\n");
  return out.str();
}

SelftestReport run_selftest(const SelftestOptions& options) {
  SelftestReport report;
  report.suites.push_back(covcheck_suite(options));
  report.suites.push_back(embedding_suite());
  report.suites.push_back(lift_suite());
  report.suites.push_back(drift_suite(options));
  report.suites.push_back(solvers_suite());
  report.suites.push_back(error_lab_suite());
  return report;
}

}  // namespace fbmlab
