#pragma once

#include <cstddef>
#include <vector>

#include "fbmlab/grid.hpp"

namespace fbmlab {

/// The base rough path and its iterated cumulative integrals.
///
/// levels()[j] is the (j+1)-fold trapezoid integral of the base, so the
/// last level is the regular noise and the one below it is its derivative.
class NoiseHierarchy {
 public:
  NoiseHierarchy(SamplePath base, std::vector<SamplePath> levels);

  const SamplePath& base() const noexcept { return base_; }
  const std::vector<SamplePath>& levels() const noexcept { return levels_; }
  std::size_t depth() const noexcept { return levels_.size(); }
  const SamplePath& top() const { return levels_.back(); }
  const UniformGrid& grid() const noexcept { return base_.grid(); }
  std::size_t dim() const noexcept { return base_.dim(); }

 private:
  SamplePath base_;
  std::vector<SamplePath> levels_;
};

/// Whether lift() insists the base starts at the origin. Deterministic
/// test paths such as the constant 1 are lifted with `any`.
enum class BaseOrigin { required, any };

/// Cumulative trapezoid integral starting from 0.
SamplePath cumulative_trapezoid(const SamplePath& f);

/// Repeated cumulative trapezoid integration, `levels` times (>= 1).
NoiseHierarchy lift(SamplePath base, std::size_t levels,
                    BaseOrigin origin = BaseOrigin::required);

/// Derivative of the top level: the level below it, or the base when the
/// hierarchy has one level.
const SamplePath& derivative_of_top(const NoiseHierarchy& h);

}  // namespace fbmlab
