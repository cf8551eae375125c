#include "fbmlab/drift.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <vector>

#include "fbmlab/errors.hpp"

namespace fbmlab {

namespace {

double param(const DriftSpec& spec, const std::string& key, double fallback) {
  auto it = spec.params.find(key);
  return it == spec.params.end() ? fallback : it->second;
}

void reject_unknown_params(const DriftSpec& spec, std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : spec.params) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw ConfigError("drift '" + spec.name + "' has no parameter '" + key + "'");
    if (!std::isfinite(value))
      throw ConfigError("drift parameter '" + key + "' must be finite");
  }
}

double euclidean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Componentwise drift x_i -> f(x_i) with diagonal Jacobian f'(x_i).
template <class F, class DF>
void componentwise(Drift& drift, F f, DF df) {
  drift.eval = [f](std::span<const double> x, std::span<double> out) {
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = f(x[i]);
  };
  drift.gradient = [df](std::span<const double> x, std::span<double> jac) {
    const std::size_t d = x.size();
    std::fill(jac.begin(), jac.end(), 0.0);
    for (std::size_t i = 0; i < d; ++i) jac[i * d + i] = df(x[i]);
  };
}

}  // namespace

bool Drift::bounded() const noexcept { return std::isfinite(bound); }

Drift make_drift(const DriftSpec& spec, std::size_t dim) {
  if (dim == 0) throw ConfigError("drift dimension must be positive");
  Drift drift;
  drift.dim = dim;
  const double root_d = std::sqrt(static_cast<double>(dim));
  std::ostringstream name;
  name << spec.name;

  if (spec.name == "zero") {
    reject_unknown_params(spec, {});
    componentwise(drift, [](double) { return 0.0; }, [](double) { return 0.0; });
    drift.bound = 0.0;
  } else if (spec.name == "constant") {
    reject_unknown_params(spec, {"value"});
    const double v = param(spec, "value", 1.0);
    componentwise(drift, [v](double) { return v; }, [](double) { return 0.0; });
    drift.bound = std::abs(v) * root_d;
    name << '(' << v << ')';
  } else if (spec.name == "capped_holder") {
    reject_unknown_params(spec, {"alpha"});
    const double a = param(spec, "alpha", 0.8);
    if (!(a > 0.0 && a <= 1.0)) throw ConfigError("capped_holder alpha must lie in (0, 1]");
    drift.eval = [a](std::span<const double> x, std::span<double> out) {
      for (std::size_t i = 0; i < x.size(); ++i)
        out[i] = std::copysign(std::min(std::pow(std::abs(x[i]), a), 1.0), x[i]);
    };
    drift.alpha = a;
    drift.bound = root_d;
    name << '(' << a << ')';
  } else if (spec.name == "sin") {
    reject_unknown_params(spec, {"a"});
    const double a = param(spec, "a", 1.0);
    componentwise(drift, [a](double x) { return -a * std::sin(x); },
                  [a](double x) { return -a * std::cos(x); });
    drift.bound = std::abs(a) * root_d;
    name << '(' << a << ')';
  } else if (spec.name == "tanh") {
    reject_unknown_params(spec, {"lambda"});
    const double l = param(spec, "lambda", 1.0);
    componentwise(drift, [l](double x) { return l * std::tanh(x); },
                  [l](double x) {
                    const double t = std::tanh(x);
                    return l * (1.0 - t * t);
                  });
    drift.bound = std::abs(l) * root_d;
    name << '(' << l << ')';
  } else {
    throw ConfigError("unknown drift '" + spec.name +
                      "' (expected zero, constant, capped_holder, sin or tanh)");
  }
  drift.name = name.str();
  return drift;
}

Drift make_linear_test_drift(double lambda, std::size_t dim) {
  Drift drift;
  drift.dim = dim;
  componentwise(drift, [lambda](double x) { return lambda * x; }, [lambda](double) { return lambda; });
  drift.bound = std::numeric_limits<double>::infinity();
  std::ostringstream name;
  name << "linear(" << lambda << ')';
  drift.name = name.str();
  return drift;
}

bool admissible(const Drift& drift, double H) {
  return H > 1.0 && drift.bounded() && drift.alpha > 1.0 - 1.0 / (2.0 * H) && drift.alpha <= 1.0;
}

void require_admissible(const Drift& drift, double H) {
  if (!(H > 1.0)) throw ConfigError("regular-noise experiments need H > 1");
  if (!drift.bounded()) throw ConfigError("drift '" + drift.name + "' is unbounded");
  const double threshold = 1.0 - 1.0 / (2.0 * H);
  if (!(drift.alpha > threshold)) {
    std::ostringstream msg;
    msg << "drift '" << drift.name << "' has alpha = " << drift.alpha
        << " but H = " << H << " requires alpha > 1 - 1/(2H) = " << threshold;
    throw ConfigError(msg.str());
  }
}

double holder_certificate(const Drift& drift, double alpha, std::size_t pairs, Engine& engine) {
  if (pairs == 0) throw ConfigError("holder certificate needs at least one pair");
  const std::size_t d = drift.dim;
  const double radius = 10.0;
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::normal_distribution<double> normal;

  std::vector<double> x(d), y(d), bx(d), by(d), diff(d);
  auto random_point = [&](std::vector<double>& p) {
    // Uniform in the cube of half-width radius / sqrt(d), which sits in the ball.
    const double half = radius / std::sqrt(static_cast<double>(d));
    for (auto& v : p) v = half * unit(engine);
  };
  double best = 0.0;
  auto probe = [&] {
    drift.eval(x, bx);
    drift.eval(y, by);
    for (std::size_t i = 0; i < d; ++i) diff[i] = x[i] - y[i];
    const double dist = euclidean(diff);
    if (dist == 0.0) return;
    for (std::size_t i = 0; i < d; ++i) diff[i] = bx[i] - by[i];
    best = std::max(best, euclidean(diff) / std::pow(dist, alpha));
  };

  for (std::size_t k = 0; k < pairs; ++k) {
    random_point(x);
    random_point(y);
    probe();
  }
  for (std::size_t k = 0; k < pairs; ++k) {
    random_point(x);
    std::vector<double> dir(d);
    for (auto& v : dir) v = normal(engine);
    const double norm = euclidean(dir);
    if (norm == 0.0) continue;
    for (double gap = 1e-1; gap >= 0.5e-6; gap *= 0.1) {
      for (std::size_t i = 0; i < d; ++i) y[i] = x[i] + gap * dir[i] / norm;
      probe();
    }
  }
  return best;
}

}  // namespace fbmlab
