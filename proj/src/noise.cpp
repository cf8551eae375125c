#include "fbmlab/noise.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "fbmlab/errors.hpp"

namespace fbmlab {

namespace {

// FFTW planning is not thread-safe; execution of an existing plan on new
// arrays is. Plans are created once per size and kept for the process.
class FftPlans {
 public:
  static FftPlans& instance() {
    static FftPlans plans;
    return plans;
  }

  fftw_plan forward(std::size_t size) {
    std::lock_guard lock(mutex_);
    auto it = plans_.find(size);
    if (it != plans_.end()) return it->second;
    auto* in = fftw_alloc_complex(size);
    auto* out = fftw_alloc_complex(size);
    fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(size), in, out, FFTW_FORWARD, FFTW_ESTIMATE);
    fftw_free(in);
    fftw_free(out);
    if (!plan) throw std::runtime_error("FFTW planning failed");
    plans_.emplace(size, plan);
    return plan;
  }

  ~FftPlans() {
    for (auto& [size, plan] : plans_) fftw_destroy_plan(plan);
  }

 private:
  std::mutex mutex_;
  std::map<std::size_t, fftw_plan> plans_;
};

struct FftwDeleter {
  void operator()(fftw_complex* p) const { fftw_free(p); }
};
using FftwBuffer = std::unique_ptr<fftw_complex[], FftwDeleter>;

FftwBuffer alloc_buffer(std::size_t size) {
  FftwBuffer buf(fftw_alloc_complex(size));
  if (!buf) throw std::bad_alloc();
  return buf;
}

void check_frac(double frac) {
  if (!(frac > 0.0 && frac < 1.0)) throw ConfigError("Hurst fraction must lie in (0, 1)");
}

void validate_autocov(std::span<const double> autocov) {
  if (autocov.size() < 2) throw ConfigError("autocovariance needs lags 0..N with N >= 1");
  if (!(autocov[0] > 0.0)) throw ConfigError("lag-0 autocovariance must be positive");
}

FgnSample sample_dense(std::span<const double> autocov, std::size_t dim, Engine& engine) {
  const std::size_t n = autocov.size() - 1;
  Eigen::MatrixXd cov(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) cov(i, j) = autocov[i > j ? i - j : j - i];
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("dense factorization of the noise covariance failed");
  const Eigen::MatrixXd lower = llt.matrixL();

  FgnSample out{std::vector<double>(n * dim), n, dim, SamplerMethod::dense_cholesky};
  std::normal_distribution<double> normal;
  Eigen::VectorXd z(n);
  for (std::size_t c = 0; c < dim; ++c) {
    for (std::size_t i = 0; i < n; ++i) z[i] = normal(engine);
    const Eigen::VectorXd x = lower * z;
    for (std::size_t i = 0; i < n; ++i) out.increments[i * dim + c] = x[i];
  }
  return out;
}

FgnSample sample_circulant(std::span<const double> spectrum, std::size_t n, std::size_t dim,
                           Engine& engine) {
  const std::size_t m = spectrum.size();
  fftw_plan plan = FftPlans::instance().forward(m);
  auto in = alloc_buffer(m);
  auto out = alloc_buffer(m);

  std::vector<double> scale(m);
  for (std::size_t k = 0; k < m; ++k)
    scale[k] = std::sqrt(std::max(spectrum[k], 0.0) / static_cast<double>(m));

  FgnSample sample{std::vector<double>(n * dim), n, dim, SamplerMethod::circulant_embedding};
  std::normal_distribution<double> normal;
  for (std::size_t c = 0; c < dim; ++c) {
    for (std::size_t k = 0; k < m; ++k) {
      const double re = normal(engine);
      const double im = normal(engine);
      in[k][0] = scale[k] * re;
      in[k][1] = scale[k] * im;
    }
    fftw_execute_dft(plan, in.get(), out.get());
    // Real and imaginary parts are each exact draws; only the real part is kept.
    for (std::size_t i = 0; i < n; ++i) sample.increments[i * dim + c] = out[i][0];
  }
  return sample;
}

}  // namespace

double fgn_autocovariance(double frac, std::size_t lag, double dt) {
  check_frac(frac);
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  const double two_h = 2.0 * frac;
  const double k = static_cast<double>(lag);
  const double scale = 0.5 * std::pow(dt, two_h);
  if (lag < 8) {
    const double km1 = lag == 0 ? 1.0 : k - 1.0;
    return scale * (std::pow(k + 1.0, two_h) - 2.0 * std::pow(k, two_h) + std::pow(km1, two_h));
  }
  // k^{2h} ((1 + x)^{2h} + (1 - x)^{2h} - 2) with x = 1/k, as the even binomial series.
  const double x2 = 1.0 / (k * k);
  double coef = 1.0, power = 1.0, sum = 0.0;
  for (int j = 1; j <= 40; ++j) {
    coef *= (two_h - (2 * j - 2)) * (two_h - (2 * j - 1)) / ((2.0 * j - 1) * (2.0 * j));
    power *= x2;
    const double term = 2.0 * coef * power;
    sum += term;
    if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
  }
  return scale * std::pow(k, two_h) * sum;
}

std::vector<double> fgn_autocovariance_vector(double frac, std::size_t steps, double dt) {
  std::vector<double> out(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) out[k] = fgn_autocovariance(frac, k, dt);
  return out;
}

const char* to_string(SamplerMethod m) {
  switch (m) {
    case SamplerMethod::circulant_embedding: return "circulant_embedding";
    case SamplerMethod::dense_cholesky: return "dense_cholesky";
  }
  return "unknown";
}

std::vector<double> circulant_embedding_spectrum(std::span<const double> autocov) {
  validate_autocov(autocov);
  const std::size_t n = autocov.size() - 1;
  const std::size_t m = 2 * n;
  fftw_plan plan = FftPlans::instance().forward(m);
  auto in = alloc_buffer(m);
  auto out = alloc_buffer(m);
  for (std::size_t k = 0; k < m; ++k) {
    in[k][0] = k <= n ? autocov[k] : autocov[m - k];
    in[k][1] = 0.0;
  }
  fftw_execute_dft(plan, in.get(), out.get());
  std::vector<double> spectrum(m);
  for (std::size_t k = 0; k < m; ++k) spectrum[k] = out[k][0];
  return spectrum;
}

FgnSample sample_stationary_gaussian(std::span<const double> autocov, std::size_t dim,
                                     Engine& engine) {
  validate_autocov(autocov);
  if (dim == 0) throw ConfigError("noise dimension must be positive");
  const std::size_t n = autocov.size() - 1;
  if (n <= kDenseFallbackSteps) return sample_dense(autocov, dim, engine);

  const auto spectrum = circulant_embedding_spectrum(autocov);
  const double max_eig = *std::max_element(spectrum.begin(), spectrum.end());
  const double min_eig = *std::min_element(spectrum.begin(), spectrum.end());
  if (min_eig < -kEmbeddingNegativeTolerance * max_eig) return sample_dense(autocov, dim, engine);
  return sample_circulant(spectrum, n, dim, engine);
}

FgnSample sample_fgn(const HurstParams& params, const UniformGrid& grid, std::size_t dim,
                     const RngSpec& rng, std::uint64_t sample_index) {
  auto engine = make_engine(rng, sample_index);
  const auto autocov = fgn_autocovariance_vector(params.frac(), grid.steps(), grid.dt());
  return sample_stationary_gaussian(autocov, dim, engine);
}

SamplePath fbm_path(const HurstParams& params, const UniformGrid& grid, std::size_t dim,
                    Engine& engine) {
  const auto autocov = fgn_autocovariance_vector(params.frac(), grid.steps(), grid.dt());
  const auto fgn = sample_stationary_gaussian(autocov, dim, engine);
  SamplePath path(grid, dim);
  for (std::size_t i = 0; i < grid.steps(); ++i)
    for (std::size_t c = 0; c < dim; ++c) path(i + 1, c) = path(i, c) + fgn.increments[i * dim + c];
  return path;
}

SamplePath fbm_path(const HurstParams& params, const UniformGrid& grid, std::size_t dim,
                    const RngSpec& rng, std::uint64_t sample_index) {
  auto engine = make_engine(rng, sample_index);
  return fbm_path(params, grid, dim, engine);
}

std::pair<SamplePath, SamplePath> exact_integrated_bm(const UniformGrid& grid, std::size_t dim,
                                                      const RngSpec& rng,
                                                      std::uint64_t sample_index) {
  auto engine = make_engine(rng, sample_index);
  std::normal_distribution<double> normal;
  const double dt = grid.dt();
  const double sd_w = std::sqrt(dt);
  // Conditional on the Brownian increment, the in-step integral of W - W(t_k)
  // is dt/2 * dW plus independent noise of variance dt^3/12.
  const double sd_residual = std::sqrt(dt * dt * dt / 12.0);
  SamplePath w(grid, dim);
  SamplePath integral(grid, dim);
  for (std::size_t i = 0; i < grid.steps(); ++i) {
    for (std::size_t c = 0; c < dim; ++c) {
      const double dw = sd_w * normal(engine);
      const double local = 0.5 * dt * dw + sd_residual * normal(engine);
      w(i + 1, c) = w(i, c) + dw;
      integral(i + 1, c) = integral(i, c) + w(i, c) * dt + local;
    }
  }
  return {std::move(w), std::move(integral)};
}

double AutocovarianceRow::z_score() const {
  if (std_error == 0.0) return empirical == exact ? 0.0 : INFINITY;
  return (empirical - exact) / std_error;
}

std::vector<AutocovarianceRow> autocovariance_check(double frac, std::span<const double> sampled,
                                                    std::size_t draws, std::size_t max_lag,
                                                    const RngSpec& rng) {
  check_frac(frac);
  validate_autocov(sampled);
  const std::size_t n = sampled.size() - 1;
  if (max_lag >= n) throw ConfigError("max lag must be below the number of steps");
  if (draws < 2) throw ConfigError("autocovariance check needs at least 2 draws");

  // Per-draw lag-k statistics are iid across draws, so their spread gives the error.
  std::vector<std::vector<double>> stats(max_lag + 1, std::vector<double>(draws));
  for (std::size_t r = 0; r < draws; ++r) {
    auto engine = make_engine(rng, r);
    const auto x = sample_stationary_gaussian(sampled, 1, engine).increments;
    for (std::size_t k = 0; k <= max_lag; ++k) {
      double acc = 0.0;
      for (std::size_t i = 0; i + k < n; ++i) acc += x[i] * x[i + k];
      stats[k][r] = acc / static_cast<double>(n - k);
    }
  }

  const double dt = 1.0 / static_cast<double>(n);
  std::vector<AutocovarianceRow> rows;
  for (std::size_t k = 0; k <= max_lag; ++k) {
    double mean = 0.0;
    for (double v : stats[k]) mean += v;
    mean /= static_cast<double>(draws);
    double var = 0.0;
    for (double v : stats[k]) var += (v - mean) * (v - mean);
    var /= static_cast<double>(draws - 1);
    rows.push_back({k, mean, fgn_autocovariance(frac, k, dt),
                    std::sqrt(var / static_cast<double>(draws))});
  }
  return rows;
}

std::vector<AutocovarianceRow> autocovariance_check(double frac, std::size_t steps,
                                                    std::size_t draws, std::size_t max_lag,
                                                    const RngSpec& rng) {
  check_frac(frac);
  const auto autocov = fgn_autocovariance_vector(frac, steps, 1.0 / static_cast<double>(steps));
  return autocovariance_check(frac, autocov, draws, max_lag, rng);
}

}  // namespace fbmlab
