#include "fbmlab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "fbmlab/errors.hpp"

namespace fbmlab {

UniformGrid::UniformGrid(std::size_t steps, double horizon)
    : steps_(steps), horizon_(horizon), dt_(horizon / static_cast<double>(steps)) {
  if (steps == 0) throw ConfigError("grid needs at least one step");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConfigError("grid horizon must be positive");
}

SamplePath::SamplePath(UniformGrid grid, std::size_t dim)
    : grid_(grid), dim_(dim), values_(grid.points() * dim, 0.0) {
  if (dim == 0) throw ConfigError("path dimension must be positive");
}

SamplePath::SamplePath(UniformGrid grid, std::size_t dim, std::vector<double> values)
    : grid_(grid), dim_(dim), values_(std::move(values)) {
  if (dim == 0) throw ConfigError("path dimension must be positive");
  if (values_.size() != grid_.points() * dim_)
    throw ConfigError("path values must hold (steps + 1) * dim entries");
}

std::vector<double> SamplePath::component(std::size_t c) const {
  std::vector<double> out(points());
  for (std::size_t i = 0; i < points(); ++i) out[i] = (*this)(i, c);
  return out;
}

bool SamplePath::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

std::size_t restriction_stride(std::size_t fine_steps, std::size_t n) {
  if (n == 0 || fine_steps % n != 0)
    throw ConfigError("coarse steps " + std::to_string(n) + " must divide fine steps " +
                      std::to_string(fine_steps));
  return fine_steps / n;
}

SamplePath restrict(const SamplePath& path, std::size_t n) {
  const std::size_t stride = restriction_stride(path.grid().steps(), n);
  SamplePath out(UniformGrid(n, path.grid().horizon()), path.dim());
  for (std::size_t k = 0; k <= n; ++k) {
    const auto src = path.row(k * stride);
    std::copy(src.begin(), src.end(), out.row(k).begin());
  }
  return out;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_path_csv(std::ostream& out, const SamplePath& path) {
  out << 't';
  for (std::size_t c = 0; c < path.dim(); ++c) out << ",x_" << (c + 1);
  out << '\n';
  for (std::size_t i = 0; i < path.points(); ++i) {
    out << format_double(path.grid().gridpoint(i));
    for (double v : path.row(i)) out << ',' << format_double(v);
    out << '\n';
  }
}

void write_path_csv(const std::string& file, const SamplePath& path) {
  std::ofstream out(file);
  if (!out) throw ConfigError("cannot open " + file + " for writing");
  write_path_csv(out, path);
}

}  // namespace fbmlab
