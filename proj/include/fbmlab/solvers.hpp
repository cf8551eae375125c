#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fbmlab/drift.hpp"
#include "fbmlab/grid.hpp"
#include "fbmlab/lift.hpp"

namespace fbmlab {

/// Where the driving noise of a solution came from. Strong errors are only
/// meaningful between solutions with equal provenance.
struct NoiseProvenance {
  std::uint64_t master_seed = 0;
  std::uint64_t sample_index = 0;
  double H = 0.0;
  bool synthetic = false;  // deterministic test input, not drawn from an RNG

  bool operator==(const NoiseProvenance&) const = default;
};

/// `checked` enforces the drift admissibility gate for provenance.H;
/// `unchecked` is for deterministic tests with unbounded drifts or H <= 1.
enum class GateMode { checked, unchecked };

/// Scheme state after `step` steps. The iterate is stored split as
/// X_k = (x0 + phi_k) + B_k with phi_k the accumulated drift integral, so
/// the noise cancels exactly between solutions driven by the same path.
struct EmState {
  std::size_t step = 0;
  std::vector<double> x0;
  std::vector<double> phi;
};

/// Euler-Maruyama recursion on the grid of `bh`:
///   phi_{k+1} = phi_k + b(X_k) dt,   X_k = x0 + phi_k + B_k.
class EulerMaruyamaStepper {
 public:
  EulerMaruyamaStepper(const Drift& drift, const SamplePath& bh, EmState state);

  /// Advances `steps` steps; throws NumericalError on non-finite drift output.
  void advance(std::size_t steps);

  const EmState& state() const noexcept { return state_; }
  /// Current iterate X_k.
  std::vector<double> x() const;

 private:
  const Drift& drift_;
  const SamplePath& bh_;
  EmState state_;
  std::vector<double> x_;
  std::vector<double> b_;
};

struct EmSolution {
  std::size_t n = 0;
  std::vector<double> x0;
  SamplePath path;   // X on the n-step grid
  SamplePath phi;    // accumulated drift integral
  SamplePath noise;  // B^H on the n-step grid
  std::string drift_name;
  NoiseProvenance provenance;
};

/// Runs the scheme with B^H given on exactly n + 1 gridpoints.
EmSolution euler_maruyama(const Drift& drift, std::span<const double> x0, const SamplePath& bh,
                          const NoiseProvenance& provenance, GateMode gate = GateMode::checked);

/// Fine-grid scheme standing in for the exact solution: Euler-Maruyama at
/// n_ref on the top level of the hierarchy.
EmSolution reference_solution(const Drift& drift, std::span<const double> x0,
                              const NoiseHierarchy& hierarchy, std::size_t n_ref,
                              const NoiseProvenance& provenance,
                              GateMode gate = GateMode::checked);

/// Richardson extrapolation 2 X^{N} - X^{N/2} of a reference solution at
/// N = ref.n on the grid with N/2 steps; cancels the first-order error
/// of the fine scheme itself.
EmSolution richardson_reference(const Drift& drift, const NoiseHierarchy& hierarchy,
                                const EmSolution& ref);

/// Explicit Euler for the coupled system X' = b(X) + (B^H)' on the n-grid,
/// with (B^H)' taken from the hierarchy.
SamplePath coupled_integrate(const Drift& drift, std::span<const double> x0,
                             const NoiseHierarchy& hierarchy, std::size_t n);

/// X_ref - X_n at the coarse gridpoints, evaluated as
/// (x0_ref - x0_n) + (phi_ref - phi_n); the shared noise cancels exactly.
/// Throws ConfigError on provenance mismatch or when em.n does not divide ref.n.
SamplePath pathwise_difference(const EmSolution& ref, const EmSolution& em);

/// Solves c' = Db(X) c + 1/2 Db(X) (b(X) + (B^H)'), c(0) = 0, with the
/// classical fourth-order Runge-Kutta method. x and bh_prime share a grid
/// with an even number N of steps; one Runge-Kutta step spans two grid
/// intervals so that every stage lands on a stored gridpoint. The result
/// lives on the grid with N/2 steps.
SamplePath optimality_ode(const Drift& drift, const SamplePath& x, const SamplePath& bh_prime);
SamplePath optimality_ode(const Drift& drift, const EmSolution& ref, const SamplePath& bh_prime);

/// e_n = n (X_ref - X_n) next to the limit c on the coarse grid.
struct OptimalityRecord {
  std::size_t n = 0;
  SamplePath e_n;
  SamplePath c;
  NoiseProvenance provenance;

  std::span<const double> e_terminal() const { return e_n.row(e_n.points() - 1); }
  std::span<const double> c_terminal() const { return c.row(c.points() - 1); }
  /// |e_n(1) - c(1)|, Euclidean over components.
  double terminal_deviation() const;
  /// |c(1)|.
  double c_terminal_norm() const;
};

/// c must live on a grid that n divides.
OptimalityRecord make_optimality_record(const EmSolution& ref, const EmSolution& em,
                                        const SamplePath& c);

}  // namespace fbmlab
