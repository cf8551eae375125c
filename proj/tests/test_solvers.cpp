#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "fbmlab/errors.hpp"
#include "fbmlab/lift.hpp"
#include "fbmlab/noise.hpp"
#include "fbmlab/solvers.hpp"
#include "oracles.hpp"

using namespace fbmlab;

namespace {

constexpr std::uint64_t kSeed = 314;

NoiseHierarchy random_hierarchy(std::size_t n, std::uint64_t index, std::size_t dim = 1) {
  const HurstParams params(1.5);
  return lift(fbm_path(params, UniformGrid(n), dim, RngSpec{kSeed}, index), params.levels());
}

NoiseProvenance prov(std::uint64_t index = 0) { return {kSeed, index, 1.5, false}; }

NoiseHierarchy zero_hierarchy(std::size_t n) { return lift(SamplePath(UniformGrid(n), 1), 1); }

double sup_abs(const SamplePath& p) {
  double m = 0.0;
  for (double v : p.values()) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

TEST(EulerMaruyama, ZeroDriftFollowsNoise) {
  const auto h = random_hierarchy(512, 0);
  const std::vector<double> x0 = {0.7};
  const auto bh = restrict(h.top(), 64);
  const auto em = euler_maruyama(make_drift({"zero", {}}, 1), x0, bh, prov());
  for (std::size_t k = 0; k <= 64; ++k) EXPECT_EQ(em.path(k, 0), 0.7 + bh(k, 0));
  const auto ref = reference_solution(make_drift({"zero", {}}, 1), x0, h, 512, prov());
  EXPECT_EQ(ref.path(512, 0), 0.7 + h.top()(512, 0));
}

TEST(EulerMaruyama, ConstantDriftIsExactAndMatchesReferenceBitwise) {
  const auto h = random_hierarchy(1024, 1);
  const auto drift = make_drift({"constant", {{"value", 0.5}}}, 1);
  const std::vector<double> x0 = {0.25};
  const auto ref = reference_solution(drift, x0, h, 1024, prov(1));
  for (std::size_t n : {8u, 64u, 256u}) {
    const auto em = euler_maruyama(drift, x0, restrict(h.top(), n), prov(1));
    for (std::size_t k = 0; k <= n; ++k)
      EXPECT_EQ(em.path(k, 0), (0.25 + 0.5 * k / n) + em.noise(k, 0));
    EXPECT_EQ(restrict(ref.path, n), em.path);
    const auto diff = pathwise_difference(ref, em);
    for (double v : diff.values()) EXPECT_EQ(v, 0.0);
  }
}

TEST(EulerMaruyama, ZeroNoiseLinearDecay) {
  const auto em = euler_maruyama(make_linear_test_drift(-1.0, 1), std::vector<double>{1.0},
                                 SamplePath(UniformGrid(4), 1), {0, 0, 0.0, true}, GateMode::unchecked);
  EXPECT_EQ(em.path(4, 0), 0.31640625);
}

TEST(EulerMaruyama, GateAndNumericalAbort) {
  const SamplePath bh(UniformGrid(4), 1);
  EXPECT_THROW(euler_maruyama(make_linear_test_drift(1.0, 1), std::vector<double>{1.0}, bh, prov()),
               ConfigError);
  EXPECT_THROW(euler_maruyama(make_drift({"capped_holder", {{"alpha", 0.5}}}, 1),
                              std::vector<double>{1.0}, bh, prov()),
               ConfigError);
  Drift bad = make_linear_test_drift(1.0, 1);
  bad.eval = [](std::span<const double> x, std::span<double> out) {
    out[0] = x[0] > 1.2 ? std::numeric_limits<double>::quiet_NaN() : 1.0;
  };
  try {
    euler_maruyama(bad, std::vector<double>{1.0}, bh, prov(), GateMode::unchecked);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_EQ(e.step(), 1u);
  }
}

TEST(EulerMaruyama, FlowProperty) {
  const auto h = random_hierarchy(256, 2, 2);
  const auto drift = make_drift({"sin", {{"a", 1.0}}}, 2);
  const std::vector<double> x0 = {0.1, -0.4};
  EulerMaruyamaStepper whole(drift, h.top(), EmState{0, x0, {0.0, 0.0}});
  whole.advance(200);
  EulerMaruyamaStepper first(drift, h.top(), EmState{0, x0, {0.0, 0.0}});
  first.advance(77);
  EulerMaruyamaStepper second(drift, h.top(), first.state());
  second.advance(123);
  EXPECT_EQ(second.state().phi, whole.state().phi);
  EXPECT_EQ(second.x(), whole.x());
  EXPECT_EQ(second.state().step, 200u);
  EXPECT_THROW(second.advance(57), ConfigError);
}

TEST(EulerMaruyama, SharedNoiseIsTheRestrictedFineNoise) {
  const auto h = random_hierarchy(2048, 3);
  const auto drift = make_drift({"tanh", {}}, 1);
  const auto ref = reference_solution(drift, std::vector<double>{0.0}, h, 2048, prov(3));
  for (std::size_t n : {16u, 128u}) {
    const auto em = euler_maruyama(drift, std::vector<double>{0.0}, restrict(h.top(), n), prov(3));
    EXPECT_EQ(em.noise, restrict(ref.noise, n));
  }
}

TEST(EulerMaruyama, DeterministicEulerIsFirstOrder) {
  const auto drift = make_drift({"tanh", {{"lambda", 1.0}}}, 1);
  const double exact = std::asinh(std::sinh(1.0) * std::exp(1.0));
  std::vector<double> logn, logerr;
  for (std::size_t n = 16; n <= 1024; n *= 2) {
    const auto em = euler_maruyama(drift, std::vector<double>{1.0}, SamplePath(UniformGrid(n), 1),
                                   {0, 0, 1.5, true});
    logn.push_back(std::log(n));
    logerr.push_back(std::log(std::abs(em.path(n, 0) - exact)));
  }
  EXPECT_NEAR(oracle::ols_slope(logn, logerr), -1.0, 0.05);
}

TEST(ReferenceSolution, SelfConvergesAtFirstOrder) {
  const auto drift = make_drift({"sin", {{"a", 1.0}}}, 1);
  std::vector<double> logn, logerr;
  for (std::size_t n_ref : {512u, 1024u, 2048u}) {
    double total = 0.0;
    for (std::uint64_t r = 0; r < 20; ++r) {
      const auto h = random_hierarchy(4096, 100 + r);
      const auto coarse = reference_solution(drift, std::vector<double>{0.0}, h, n_ref, prov(100 + r));
      const auto fine =
          reference_solution(drift, std::vector<double>{0.0}, h, 2 * n_ref, prov(100 + r));
      total += sup_abs(pathwise_difference(fine, coarse));
    }
    logn.push_back(std::log(n_ref));
    logerr.push_back(std::log(total / 20));
  }
  EXPECT_NEAR(oracle::ols_slope(logn, logerr), -1.0, 0.15);
}

TEST(PathwiseDifference, RejectsDecoupledSolutions) {
  const auto h = random_hierarchy(64, 4);
  const auto drift = make_drift({"zero", {}}, 1);
  const auto a = reference_solution(drift, std::vector<double>{0.0}, h, 64, prov(4));
  const auto b = euler_maruyama(drift, std::vector<double>{0.0}, restrict(h.top(), 16), prov(5));
  EXPECT_THROW(pathwise_difference(a, b), ConfigError);
  const auto c = euler_maruyama(drift, std::vector<double>{0.0}, restrict(h.top(), 16), prov(4));
  EXPECT_NO_THROW(pathwise_difference(a, c));
  const auto self = pathwise_difference(a, a);
  for (double v : self.values()) EXPECT_EQ(v, 0.0);
}

TEST(CoupledIntegrate, ConstantVelocity) {
  SamplePath one(UniformGrid(64), 1);
  for (double& v : one.values()) v = 1.0;
  const auto h = lift(one, 1, BaseOrigin::any);
  for (std::size_t n : {4u, 16u, 64u}) {
    const auto x = coupled_integrate(make_drift({"zero", {}}, 1), std::vector<double>{0.5}, h, n);
    for (std::size_t k = 0; k <= n; ++k) EXPECT_EQ(x(k, 0), 0.5 + static_cast<double>(k) / n);
  }
}

TEST(CoupledIntegrate, LeftRuleBoundForZeroDrift) {
  const std::size_t fine = 4096, paths = 200;
  for (std::size_t n : {64u, 512u, 4096u}) {
    std::size_t within_c1 = 0;
    for (std::uint64_t r = 0; r < paths; ++r) {
      const auto h = random_hierarchy(fine, 200 + r);
      const auto& v = derivative_of_top(h);
      const auto x = coupled_integrate(make_drift({"zero", {}}, 1), std::vector<double>{0.0}, h, n);
      const double err = std::abs(x(n, 0) - h.top()(fine, 0));
      // Left rule against the fine trapezoid: each block is off by at most
      // dt times the velocity oscillation inside it.
      const std::size_t s = fine / n;
      double bound = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        double osc = 0.0;
        for (std::size_t j = k * s; j <= (k + 1) * s; ++j) osc = std::max(osc, std::abs(v(j, 0) - v(k * s, 0)));
        bound += osc / n;
      }
      EXPECT_LE(err, bound + 1e-15);
      if (err <= sup_abs(v) / n) ++within_c1;
    }
    EXPECT_GE(within_c1, paths * 95 / 100) << n;
  }
}

TEST(CoupledIntegrate, AgreesWithEulerMaruyamaOnFineGrid) {
  const auto drift = make_drift({"sin", {{"a", 1.0}}}, 1);
  for (std::uint64_t r = 0; r < 5; ++r) {
    const auto h = random_hierarchy(4096, 300 + r);
    const auto x = coupled_integrate(drift, std::vector<double>{0.2}, h, 4096);
    const auto em = reference_solution(drift, std::vector<double>{0.2}, h, 4096, prov(300 + r));
    double dist = 0.0;
    for (std::size_t k = 0; k <= 4096; ++k) dist = std::max(dist, std::abs(x(k, 0) - em.path(k, 0)));
    EXPECT_LE(dist, 5.0 * sup_abs(derivative_of_top(h)) / 4096);
  }
}

TEST(OptimalityOde, ConstantDriftGivesZero) {
  const auto h = random_hierarchy(512, 5);
  const auto drift = make_drift({"constant", {{"value", 0.3}}}, 1);
  const auto ref = reference_solution(drift, std::vector<double>{0.0}, h, 512, prov(5));
  const auto c = optimality_ode(drift, ref, derivative_of_top(h));
  EXPECT_EQ(c.grid().steps(), 256u);
  for (double v : c.values()) EXPECT_EQ(v, 0.0);
}

TEST(OptimalityOde, SyntheticExponential) {
  const double lambda = 1.0, x0 = 1.0;
  // c(1) = int_0^1 e^{lambda (1 - s)} (lambda / 2) (lambda X_s) ds
  const double want = oracle::integral(
      [&](double s) { return std::exp(lambda * (1 - s)) * 0.5 * lambda * lambda * x0 * std::exp(lambda * s); },
      0, 1, 50);
  EXPECT_NEAR(want, std::exp(1.0) / 2, 1e-12);
  const std::size_t n = 1024;
  SamplePath x(UniformGrid(n), 1);
  for (std::size_t i = 0; i <= n; ++i) x(i, 0) = x0 * std::exp(lambda * x.grid().gridpoint(i));
  const auto c = optimality_ode(make_linear_test_drift(lambda, 1), x, SamplePath(UniformGrid(n), 1));
  EXPECT_EQ(c(0, 0), 0.0);
  EXPECT_NEAR(c(n / 2, 0), want, 1e-10);
  for (std::size_t k = 0; k <= n / 2; ++k) {
    const double t = c.grid().gridpoint(k);
    EXPECT_NEAR(c(k, 0), 0.5 * lambda * lambda * x0 * t * std::exp(lambda * t), 1e-10);
  }
}

TEST(OptimalityOde, FourthOrderSelfConvergence) {
  const auto drift = make_drift({"sin", {{"a", 1.0}}}, 1);
  auto solve = [&](std::size_t n) {
    SamplePath x(UniformGrid(n), 1), v(UniformGrid(n), 1);
    for (std::size_t i = 0; i <= n; ++i) {
      const double t = x.grid().gridpoint(i);
      x(i, 0) = std::sin(3 * t) + 0.5 * t;
      v(i, 0) = std::cos(5 * t);
    }
    return optimality_ode(drift, x, v);
  };
  double previous = 0.0;
  for (std::size_t n = 16; n <= 256; n *= 2) {
    const auto coarse = solve(n), fine = solve(2 * n);
    double gap = 0.0;
    const auto r = restrict(fine, n / 2);
    for (std::size_t k = 0; k <= n / 2; ++k) gap = std::max(gap, std::abs(coarse(k, 0) - r(k, 0)));
    if (previous > 0.0) EXPECT_GE(previous / gap, 8.0) << n;
    previous = gap;
  }
}

TEST(OptimalityOde, Rejections) {
  const SamplePath x(UniformGrid(8), 1);
  EXPECT_THROW(optimality_ode(make_drift({"capped_holder", {}}, 1), x, x), ConfigError);
  const SamplePath odd(UniformGrid(7), 1);
  EXPECT_THROW(optimality_ode(make_drift({"sin", {}}, 1), odd, odd), ConfigError);
}

TEST(OptimalityRecord, ScalesDifferenceByN) {
  const auto h = random_hierarchy(1024, 6);
  const auto drift = make_drift({"sin", {{"a", 1.0}}}, 1);
  const auto ref = reference_solution(drift, std::vector<double>{0.0}, h, 1024, prov(6));
  const auto em = euler_maruyama(drift, std::vector<double>{0.0}, restrict(h.top(), 64), prov(6));
  const auto c = optimality_ode(drift, ref, derivative_of_top(h));
  const auto rec = make_optimality_record(ref, em, c);
  const auto diff = pathwise_difference(ref, em);
  for (std::size_t k = 0; k <= 64; ++k) EXPECT_EQ(rec.e_n(k, 0), 64.0 * diff(k, 0));
  EXPECT_EQ(rec.c, restrict(c, 64));
  EXPECT_EQ(rec.terminal_deviation(), std::abs(rec.e_n(64, 0) - rec.c(64, 0)));
}

TEST(RichardsonReference, CancelsFirstOrderErrorOfTheFineScheme) {
  const auto drift = make_drift({"tanh", {{"lambda", 1.0}}}, 1);
  const auto zero = zero_hierarchy(1024);
  const NoiseProvenance p{0, 0, 1.5, true};
  const double exact = std::asinh(std::sinh(1.0) * std::exp(1.0));
  const auto fine = reference_solution(drift, std::vector<double>{1.0}, zero, 1024, p);
  const auto rich = richardson_reference(drift, zero, fine);
  EXPECT_EQ(rich.n, 512u);
  EXPECT_LT(std::abs(rich.path(512, 0) - exact), 0.01 * std::abs(fine.path(1024, 0) - exact));
}
