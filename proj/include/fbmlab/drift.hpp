#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>

#include "fbmlab/rng.hpp"

namespace fbmlab {

/// Name plus numeric parameters, e.g. {"capped_holder", {{"alpha", 0.8}}}.
struct DriftSpec {
  std::string name = "zero";
  std::map<std::string, double> params;

  bool operator==(const DriftSpec&) const = default;
};

/// Drift b: R^d -> R^d with optional gradient (row-major d x d Jacobian,
/// entry (i, j) = d b_i / d x_j).
struct Drift {
  using Eval = std::function<void(std::span<const double> x, std::span<double> out)>;
  using Gradient = std::function<void(std::span<const double> x, std::span<double> jac)>;

  std::string name;
  std::size_t dim = 1;
  Eval eval;
  std::optional<Gradient> gradient;
  double alpha = 1.0;  // declared Hölder exponent
  double bound = 0.0;  // declared sup of |b|, infinite for test-only drifts

  bool has_gradient() const noexcept { return gradient.has_value(); }
  bool bounded() const noexcept;
};

/// Built-ins: zero, constant(value), capped_holder(alpha), sin(a), tanh(lambda).
Drift make_drift(const DriftSpec& spec, std::size_t dim);

/// b(x) = lambda * x. Unbounded, so it never passes the admissibility gate.
Drift make_linear_test_drift(double lambda, std::size_t dim);

/// Admissibility for noise of index H > 1: b bounded and alpha > 1 - 1/(2H).
bool admissible(const Drift& drift, double H);
/// Same as admissible() but throws ConfigError naming the violated condition.
void require_admissible(const Drift& drift, double H);

/// Sampled lower bound for the Hölder seminorm of b with exponent alpha:
/// the largest |b(x) - b(y)| / |x - y|^alpha over `pairs` random pairs in
/// the ball of radius 10 plus near-coincident pairs at gaps 1e-1 .. 1e-6.
double holder_certificate(const Drift& drift, double alpha, std::size_t pairs, Engine& engine);

}  // namespace fbmlab
