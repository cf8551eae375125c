#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "fbmlab/grid.hpp"
#include "fbmlab/hurst.hpp"
#include "fbmlab/rng.hpp"

namespace fbmlab {

/// Autocovariance of fractional Gaussian noise with step dt, normalized so
/// that E|B_t - B_s|^2 = |t - s|^{2 frac}:
///   gamma(k) = dt^{2h}/2 (|k+1|^{2h} - 2|k|^{2h} + |k-1|^{2h}).
double fgn_autocovariance(double frac, std::size_t lag, double dt);

enum class SamplerMethod { circulant_embedding, dense_cholesky };

const char* to_string(SamplerMethod m);

/// Increments of one draw, row-major steps x dim.
struct FgnSample {
  std::vector<double> increments;
  std::size_t steps = 0;
  std::size_t dim = 0;
  SamplerMethod method = SamplerMethod::circulant_embedding;
};

/// Below or at this size the dense factorization is used directly.
inline constexpr std::size_t kDenseFallbackSteps = 64;
/// Embedding eigenvalues below -tol * max eigenvalue force the dense path.
inline constexpr double kEmbeddingNegativeTolerance = 1e-9;

/// Eigenvalues of the circulant embedding of length 2N built from the
/// autocovariance at lags 0..N (autocov.size() == N + 1).
std::vector<double> circulant_embedding_spectrum(std::span<const double> autocov);

/// Exact sampler for a stationary Gaussian N-vector given its autocovariance
/// at lags 0..N (lag N is only used by the embedding). Each of the dim
/// components is an independent copy.
FgnSample sample_stationary_gaussian(std::span<const double> autocov, std::size_t dim,
                                     Engine& engine);

/// Fractional Gaussian noise increments for the fractional part of params.
FgnSample sample_fgn(const HurstParams& params, const UniformGrid& grid, std::size_t dim,
                     const RngSpec& rng, std::uint64_t sample_index);

/// Base fBM path with fractional index params.frac(): cumulative sum of the
/// fGn increments, starting at the origin.
SamplePath fbm_path(const HurstParams& params, const UniformGrid& grid, std::size_t dim,
                    const RngSpec& rng, std::uint64_t sample_index);
SamplePath fbm_path(const HurstParams& params, const UniformGrid& grid, std::size_t dim,
                    Engine& engine);

/// Exact joint draw of Brownian motion W and its running integral I at the
/// gridpoints.
std::pair<SamplePath, SamplePath> exact_integrated_bm(const UniformGrid& grid, std::size_t dim,
                                                      const RngSpec& rng,
                                                      std::uint64_t sample_index);

/// One row of an empirical autocovariance check.
struct AutocovarianceRow {
  std::size_t lag = 0;
  double empirical = 0.0;
  double exact = 0.0;
  double std_error = 0.0;

  double z_score() const;
};

/// Empirical fGn autocovariance at lags 0..max_lag over `draws` independent
/// draws of N-step increments (dt = 1/N), using the known zero mean.
/// Draws are generated from substreams 0..draws-1 of rng.
std::vector<AutocovarianceRow> autocovariance_check(double frac, std::size_t steps,
                                                    std::size_t draws, std::size_t max_lag,
                                                    const RngSpec& rng);

/// fgn_autocovariance at lags 0..steps.
std::vector<double> fgn_autocovariance_vector(double frac, std::size_t steps, double dt);

/// Same check, but the draws come from the stationary law with
/// autocovariance `sampled` (lags 0..N) while the comparison stays against
/// the fGn closed form for `frac`. Used for negative controls.
std::vector<AutocovarianceRow> autocovariance_check(double frac, std::span<const double> sampled,
                                                    std::size_t draws, std::size_t max_lag,
                                                    const RngSpec& rng);

}  // namespace fbmlab
