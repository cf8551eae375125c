#include "fbmlab/hurst.hpp"

#include <cmath>
#include <sstream>

#include "fbmlab/errors.hpp"

namespace fbmlab {

HurstParams::HurstParams(double H) : H_(H) {
  if (!std::isfinite(H) || !(H > 0.0)) throw ConfigError("Hurst index H must be positive");
  if (std::abs(H - std::round(H)) <= kIntegerHurstTolerance) {
    std::ostringstream msg;
    msg << "Hurst index H must not be an integer (got " << H << ")";
    throw ConfigError(msg.str());
  }
  const double floor = std::floor(H);
  levels_ = static_cast<std::size_t>(floor);
  frac_ = H - floor;  // exact by Sterbenz, so levels_ + frac_ == H
}

}  // namespace fbmlab
