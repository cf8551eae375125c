#include "fbmlab/solvers.hpp"

#include <cmath>
#include <sstream>

#include "fbmlab/errors.hpp"

namespace fbmlab {

namespace {

void check_dims(const Drift& drift, std::size_t x0_dim, std::size_t noise_dim) {
  if (drift.dim != x0_dim || noise_dim != x0_dim)
    throw ConfigError("drift, initial point and noise must share the dimension");
}

void check_finite(std::span<const double> v, std::size_t step, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      std::ostringstream msg;
      msg << what << " is not finite at step " << step;
      throw NumericalError(msg.str(), step);
    }
  }
}

double euclidean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

EulerMaruyamaStepper::EulerMaruyamaStepper(const Drift& drift, const SamplePath& bh, EmState state)
    : drift_(drift), bh_(bh), state_(std::move(state)) {
  const std::size_t d = state_.x0.size();
  check_dims(drift, d, bh.dim());
  if (state_.phi.empty()) state_.phi.assign(d, 0.0);
  if (state_.phi.size() != d) throw ConfigError("scheme state has the wrong dimension");
  if (state_.step > bh.grid().steps()) throw ConfigError("scheme state lies beyond the noise grid");
  x_.resize(d);
  b_.resize(d);
}

std::vector<double> EulerMaruyamaStepper::x() const {
  std::vector<double> x(state_.x0.size());
  const auto noise = bh_.row(state_.step);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = (state_.x0[i] + state_.phi[i]) + noise[i];
  return x;
}

void EulerMaruyamaStepper::advance(std::size_t steps) {
  if (state_.step + steps > bh_.grid().steps())
    throw ConfigError("cannot advance the scheme past the end of the noise grid");
  const double dt = bh_.grid().dt();
  const std::size_t d = x_.size();
  for (std::size_t s = 0; s < steps; ++s) {
    const auto noise = bh_.row(state_.step);
    for (std::size_t i = 0; i < d; ++i) x_[i] = (state_.x0[i] + state_.phi[i]) + noise[i];
    drift_.eval(x_, b_);
    check_finite(b_, state_.step, "drift output");
    for (std::size_t i = 0; i < d; ++i) state_.phi[i] += b_[i] * dt;
    ++state_.step;
  }
}

EmSolution euler_maruyama(const Drift& drift, std::span<const double> x0, const SamplePath& bh,
                          const NoiseProvenance& provenance, GateMode gate) {
  if (gate == GateMode::checked) require_admissible(drift, provenance.H);
  check_dims(drift, x0.size(), bh.dim());
  check_finite(x0, 0, "initial point");

  const std::size_t n = bh.grid().steps();
  const std::size_t d = x0.size();
  EmSolution sol{n,
                 std::vector<double>(x0.begin(), x0.end()),
                 SamplePath(bh.grid(), d),
                 SamplePath(bh.grid(), d),
                 bh,
                 drift.name,
                 provenance};

  EulerMaruyamaStepper stepper(drift, bh, EmState{0, sol.x0, {}});
  for (std::size_t k = 0;; ++k) {
    const auto x = stepper.x();
    check_finite(x, k, "iterate");
    std::copy(x.begin(), x.end(), sol.path.row(k).begin());
    const auto& phi = stepper.state().phi;
    std::copy(phi.begin(), phi.end(), sol.phi.row(k).begin());
    if (k == n) break;
    stepper.advance(1);
  }
  return sol;
}

EmSolution reference_solution(const Drift& drift, std::span<const double> x0,
                              const NoiseHierarchy& hierarchy, std::size_t n_ref,
                              const NoiseProvenance& provenance, GateMode gate) {
  const SamplePath& top = hierarchy.top();
  if (top.grid().steps() == n_ref) return euler_maruyama(drift, x0, top, provenance, gate);
  return euler_maruyama(drift, x0, restrict(top, n_ref), provenance, gate);
}

EmSolution richardson_reference(const Drift& drift, const NoiseHierarchy& hierarchy,
                                const EmSolution& ref) {
  if (ref.n % 2 != 0) throw ConfigError("extrapolated reference needs an even n_ref");
  const std::size_t half = ref.n / 2;
  const EmSolution coarse = euler_maruyama(drift, ref.x0, restrict(hierarchy.top(), half),
                                           ref.provenance, GateMode::unchecked);
  EmSolution out = coarse;
  const std::size_t d = ref.x0.size();
  for (std::size_t k = 0; k <= half; ++k) {
    const auto fine_phi = ref.phi.row(2 * k);
    const auto noise = out.noise.row(k);
    for (std::size_t i = 0; i < d; ++i) {
      out.phi(k, i) = 2.0 * fine_phi[i] - coarse.phi(k, i);
      out.path(k, i) = (out.x0[i] + out.phi(k, i)) + noise[i];
    }
  }
  return out;
}

SamplePath coupled_integrate(const Drift& drift, std::span<const double> x0,
                             const NoiseHierarchy& hierarchy, std::size_t n) {
  const SamplePath& velocity = derivative_of_top(hierarchy);
  const std::size_t stride = restriction_stride(velocity.grid().steps(), n);
  const std::size_t d = x0.size();
  check_dims(drift, d, velocity.dim());

  const UniformGrid grid(n, velocity.grid().horizon());
  SamplePath x(grid, d);
  std::copy(x0.begin(), x0.end(), x.row(0).begin());
  std::vector<double> b(d);
  const double dt = grid.dt();
  for (std::size_t k = 0; k < n; ++k) {
    drift.eval(x.row(k), b);
    check_finite(b, k, "drift output");
    const auto v = velocity.row(k * stride);
    for (std::size_t i = 0; i < d; ++i) x(k + 1, i) = x(k, i) + (b[i] + v[i]) * dt;
  }
  return x;
}

SamplePath pathwise_difference(const EmSolution& ref, const EmSolution& em) {
  if (!(ref.provenance == em.provenance))
    throw ConfigError("solutions are driven by different noise; strong error is undefined");
  const std::size_t stride = restriction_stride(ref.n, em.n);
  const std::size_t d = ref.x0.size();
  if (em.x0.size() != d) throw ConfigError("solutions differ in dimension");

  SamplePath diff(em.path.grid(), d);
  for (std::size_t k = 0; k <= em.n; ++k) {
    const auto phi_ref = ref.phi.row(k * stride);
    const auto phi_em = em.phi.row(k);
    for (std::size_t i = 0; i < d; ++i)
      diff(k, i) = (ref.x0[i] - em.x0[i]) + (phi_ref[i] - phi_em[i]);
  }
  return diff;
}

SamplePath optimality_ode(const Drift& drift, const SamplePath& x, const SamplePath& bh_prime) {
  if (!drift.has_gradient())
    throw ConfigError("drift '" + drift.name + "' has no gradient; the limit ODE needs b in C^1");
  if (x.grid() != bh_prime.grid() || x.dim() != bh_prime.dim())
    throw ConfigError("solution and noise derivative must share grid and dimension");
  const std::size_t fine = x.grid().steps();
  if (fine % 2 != 0) throw ConfigError("the limit ODE needs an even number of fine steps");
  const std::size_t d = x.dim();
  check_dims(drift, d, d);

  // Coefficients c' = J_i c + s_i at every fine gridpoint.
  std::vector<double> jac((fine + 1) * d * d);
  std::vector<double> source((fine + 1) * d);
  std::vector<double> b(d);
  for (std::size_t i = 0; i <= fine; ++i) {
    const auto xi = x.row(i);
    std::span<double> ji(jac.data() + i * d * d, d * d);
    (*drift.gradient)(xi, ji);
    drift.eval(xi, b);
    const auto v = bh_prime.row(i);
    for (std::size_t r = 0; r < d; ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < d; ++c) s += ji[r * d + c] * (b[c] + v[c]);
      source[i * d + r] = 0.5 * s;
    }
  }
  auto rhs = [&](std::size_t i, std::span<const double> c, std::span<double> out) {
    const double* ji = jac.data() + i * d * d;
    for (std::size_t r = 0; r < d; ++r) {
      double s = source[i * d + r];
      for (std::size_t q = 0; q < d; ++q) s += ji[r * d + q] * c[q];
      out[r] = s;
    }
  };

  const std::size_t macro = fine / 2;
  const UniformGrid grid(macro, x.grid().horizon());
  const double h = grid.dt();
  SamplePath out(grid, d);
  std::vector<double> c(d, 0.0), k1(d), k2(d), k3(d), k4(d), tmp(d);
  for (std::size_t m = 0; m < macro; ++m) {
    const std::size_t i0 = 2 * m;
    rhs(i0, c, k1);
    for (std::size_t r = 0; r < d; ++r) tmp[r] = c[r] + 0.5 * h * k1[r];
    rhs(i0 + 1, tmp, k2);
    for (std::size_t r = 0; r < d; ++r) tmp[r] = c[r] + 0.5 * h * k2[r];
    rhs(i0 + 1, tmp, k3);
    for (std::size_t r = 0; r < d; ++r) tmp[r] = c[r] + h * k3[r];
    rhs(i0 + 2, tmp, k4);
    for (std::size_t r = 0; r < d; ++r)
      c[r] += h / 6.0 * (k1[r] + 2.0 * k2[r] + 2.0 * k3[r] + k4[r]);
    check_finite(c, m + 1, "limit ODE solution");
    std::copy(c.begin(), c.end(), out.row(m + 1).begin());
  }
  return out;
}

SamplePath optimality_ode(const Drift& drift, const EmSolution& ref, const SamplePath& bh_prime) {
  if (bh_prime.grid().steps() == ref.n) return optimality_ode(drift, ref.path, bh_prime);
  return optimality_ode(drift, ref.path, restrict(bh_prime, ref.n));
}

double OptimalityRecord::terminal_deviation() const {
  const auto e = e_terminal();
  const auto c_end = c_terminal();
  double s = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) s += (e[i] - c_end[i]) * (e[i] - c_end[i]);
  return std::sqrt(s);
}

double OptimalityRecord::c_terminal_norm() const { return euclidean(c_terminal()); }

OptimalityRecord make_optimality_record(const EmSolution& ref, const EmSolution& em,
                                        const SamplePath& c) {
  SamplePath e = pathwise_difference(ref, em);
  const double scale = static_cast<double>(em.n);
  for (auto& v : e.values()) v *= scale;
  return OptimalityRecord{em.n, std::move(e), restrict(c, em.n), em.provenance};
}

}  // namespace fbmlab
