#include "fbmlab/lift.hpp"

#include "fbmlab/errors.hpp"

namespace fbmlab {

NoiseHierarchy::NoiseHierarchy(SamplePath base, std::vector<SamplePath> levels)
    : base_(std::move(base)), levels_(std::move(levels)) {
  if (levels_.empty()) throw ConfigError("noise hierarchy needs at least one level");
  for (const auto& level : levels_)
    if (level.grid() != base_.grid() || level.dim() != base_.dim())
      throw ConfigError("hierarchy levels must share the base grid and dimension");
}

SamplePath cumulative_trapezoid(const SamplePath& f) {
  SamplePath out(f.grid(), f.dim());
  const double half_dt = 0.5 * f.grid().dt();
  for (std::size_t i = 0; i < f.grid().steps(); ++i)
    for (std::size_t c = 0; c < f.dim(); ++c)
      out(i + 1, c) = out(i, c) + half_dt * (f(i, c) + f(i + 1, c));
  return out;
}

NoiseHierarchy lift(SamplePath base, std::size_t levels, BaseOrigin origin) {
  if (levels == 0) throw ConfigError("lift needs at least one level; use the base path directly");
  if (origin == BaseOrigin::required)
    for (double v : base.row(0))
      if (v != 0.0) throw ConfigError("base path must start at the origin");

  std::vector<SamplePath> out;
  out.reserve(levels);
  out.push_back(cumulative_trapezoid(base));
  for (std::size_t j = 1; j < levels; ++j) out.push_back(cumulative_trapezoid(out.back()));
  return NoiseHierarchy(std::move(base), std::move(out));
}

const SamplePath& derivative_of_top(const NoiseHierarchy& h) {
  return h.depth() == 1 ? h.base() : h.levels()[h.depth() - 2];
}

}  // namespace fbmlab
