#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace fbmlab {

/// Uniform grid i*dt, i = 0..steps, on [0, horizon].
class UniformGrid {
 public:
  explicit UniformGrid(std::size_t steps, double horizon = 1.0);

  std::size_t steps() const noexcept { return steps_; }
  std::size_t points() const noexcept { return steps_ + 1; }
  double horizon() const noexcept { return horizon_; }
  double dt() const noexcept { return dt_; }
  double gridpoint(std::size_t i) const noexcept { return static_cast<double>(i) * dt_; }

  bool operator==(const UniformGrid&) const = default;

 private:
  std::size_t steps_;
  double horizon_;
  double dt_;
};

/// Values of a d-dimensional process on a uniform grid, stored row-major
/// as (steps + 1) x dim.
class SamplePath {
 public:
  SamplePath(UniformGrid grid, std::size_t dim);
  SamplePath(UniformGrid grid, std::size_t dim, std::vector<double> values);

  const UniformGrid& grid() const noexcept { return grid_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t points() const noexcept { return grid_.points(); }

  std::span<const double> row(std::size_t i) const { return {values_.data() + i * dim_, dim_}; }
  std::span<double> row(std::size_t i) { return {values_.data() + i * dim_, dim_}; }
  double operator()(std::size_t i, std::size_t c) const { return values_[i * dim_ + c]; }
  double& operator()(std::size_t i, std::size_t c) { return values_[i * dim_ + c]; }

  const std::vector<double>& values() const noexcept { return values_; }
  std::vector<double>& values() noexcept { return values_; }

  /// Component c as a contiguous series.
  std::vector<double> component(std::size_t c) const;
  bool all_finite() const;

  bool operator==(const SamplePath&) const = default;

 private:
  UniformGrid grid_;
  std::size_t dim_;
  std::vector<double> values_;
};

/// Exact restriction to the coarse grid k/n, k = 0..n. Requires n | steps.
SamplePath restrict(const SamplePath& path, std::size_t n);

/// Stride between the fine and the coarse grid; throws ConfigError unless n | fine.
std::size_t restriction_stride(std::size_t fine_steps, std::size_t n);

/// Formats with 17 significant digits so output is byte-reproducible.
std::string format_double(double v);

/// CSV dump with header `t,x_1,...,x_d`.
void write_path_csv(std::ostream& out, const SamplePath& path);
void write_path_csv(const std::string& file, const SamplePath& path);

}  // namespace fbmlab
