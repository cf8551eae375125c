#pragma once

#include <cstddef>

namespace fbmlab {

/// Hurst index split into integration levels and fractional part:
/// H = levels + frac with frac in (0, 1).
class HurstParams {
 public:
  /// Throws ConfigError unless H > 0 and H is not within 1e-12 of an integer.
  explicit HurstParams(double H);

  double H() const noexcept { return H_; }
  std::size_t levels() const noexcept { return levels_; }
  double frac() const noexcept { return frac_; }

  /// True when H > 1, the regular-noise regime.
  bool regular() const noexcept { return levels_ >= 1; }

 private:
  double H_;
  std::size_t levels_;
  double frac_;
};

inline constexpr double kIntegerHurstTolerance = 1e-12;

}  // namespace fbmlab
