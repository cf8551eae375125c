#include "fbmlab/error_lab.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <boost/math/distributions/students_t.hpp>

#include "fbmlab/errors.hpp"
#include "json.hpp"

namespace fbmlab {

namespace {

double norm_row(std::span<const double> v) {
  if (v.size() == 1) return std::abs(v[0]);
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

std::string to_string(Metric m) {
  switch (m) {
    case Metric::sup_grid: return "sup-grid";
    case Metric::lp_terminal: return "Lp-terminal";
    case Metric::cp_half: return "Cp-half";
  }
  return "unknown";
}

Metric parse_metric(const std::string& s) {
  if (s == "sup-grid") return Metric::sup_grid;
  if (s == "Lp-terminal") return Metric::lp_terminal;
  if (s == "Cp-half") return Metric::cp_half;
  throw ConfigError("unknown metric '" + s + "' (expected sup-grid, Lp-terminal or Cp-half)");
}

StrongErrorSample strong_error_sample(const EmSolution& ref, const EmSolution& em) {
  StrongErrorSample out{0.0, 0.0, pathwise_difference(ref, em)};
  for (std::size_t k = 0; k < out.diff.points(); ++k)
    out.sup = std::max(out.sup, norm_row(out.diff.row(k)));
  out.terminal = norm_row(out.diff.row(out.diff.points() - 1));
  return out;
}

double compensated_sum(std::span<const double> values) {
  double sum = 0.0;
  double carry = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      carry += (sum - t) + v;
    else
      carry += (v - t) + sum;
    sum = t;
  }
  return sum + carry;
}

MomentEstimate lp_moment(std::span<const double> samples, double p) {
  if (samples.empty()) throw ConfigError("moment estimate needs at least one sample");
  if (!(p >= 1.0)) throw ConfigError("moment order p must be at least 1");
  for (double v : samples)
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("moment samples must be finite and nonnegative");

  const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
  if (*lo == *hi) return {*lo, 0.0};

  const std::size_t m = samples.size();
  std::vector<double> powered(m);
  std::transform(samples.begin(), samples.end(), powered.begin(),
                 [p](double v) { return p == 2.0 ? v * v : std::pow(v, p); });
  const double mean = compensated_sum(powered) / static_cast<double>(m);
  const double estimate = std::pow(mean, 1.0 / p);
  if (m < 2 || mean == 0.0) return {estimate, 0.0};

  for (auto& v : powered) v = (v - mean) * (v - mean);
  const double var = compensated_sum(powered) / static_cast<double>(m - 1);
  const double se_mean = std::sqrt(var / static_cast<double>(m));
  // d/dm m^{1/p} = (1/p) m^{1/p - 1}
  return {estimate, se_mean * estimate / (p * mean)};
}

std::vector<std::pair<std::size_t, std::size_t>> seminorm_pairs(std::size_t n, std::size_t budget) {
  if (budget == 0) throw ConfigError("pair budget must be positive");
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  const std::size_t total = n * (n + 1) / 2;
  if (total <= budget) {
    pairs.reserve(total);
    for (std::size_t i = 0; i <= n; ++i)
      for (std::size_t j = i + 1; j <= n; ++j) pairs.emplace_back(i, j);
    return pairs;
  }

  std::size_t bands = 0;
  for (std::size_t g = 1; g <= n; g *= 2) ++bands;
  const std::size_t quota = std::max<std::size_t>(1, budget / bands);
  for (std::size_t lo = 1; lo <= n; lo *= 2) {
    const std::size_t hi = std::min(2 * lo - 1, n);
    // Pairs with gap g in [lo, hi]: sum over g of (n + 1 - g).
    std::size_t count = 0;
    for (std::size_t g = lo; g <= hi; ++g) count += n + 1 - g;
    const double stride = std::max(1.0, static_cast<double>(count) / static_cast<double>(quota));
    double next = 0.0;
    std::size_t index = 0;
    for (std::size_t g = lo; g <= hi; ++g) {
      for (std::size_t i = 0; i + g <= n; ++i, ++index) {
        if (static_cast<double>(index) >= next) {
          pairs.emplace_back(i, i + g);
          next += stride;
        }
      }
    }
  }
  if (std::find(pairs.begin(), pairs.end(), std::pair<std::size_t, std::size_t>{0, n}) == pairs.end())
    pairs.emplace_back(0, n);
  return pairs;
}

SeminormEstimate cp_half_seminorm(std::span<const SamplePath> diffs, double p,
                                  std::size_t pair_budget) {
  if (diffs.empty()) throw ConfigError("seminorm estimate needs at least one sample");
  const UniformGrid& grid = diffs.front().grid();
  for (const auto& f : diffs)
    if (f.grid() != grid || f.dim() != diffs.front().dim())
      throw ConfigError("all samples must share the coarse grid");

  SeminormEstimate best;
  const auto pairs = seminorm_pairs(grid.steps(), pair_budget);
  best.pairs = pairs.size();
  std::vector<double> gaps(diffs.size());
  std::vector<double> delta(diffs.front().dim());
  for (const auto& [i, j] : pairs) {
    for (std::size_t s = 0; s < diffs.size(); ++s) {
      const auto a = diffs[s].row(i);
      const auto b = diffs[s].row(j);
      for (std::size_t c = 0; c < delta.size(); ++c) delta[c] = b[c] - a[c];
      gaps[s] = norm_row(delta);
    }
    const auto moment = lp_moment(gaps, p);
    const double scale = std::sqrt(static_cast<double>(j - i) * grid.dt());
    const double ratio = moment.estimate / scale;
    if (ratio > best.estimate || (best.first == best.second)) {
      best.estimate = ratio;
      best.std_error = moment.std_error / scale;
      best.first = i;
      best.second = j;
    }
  }
  return best;
}

ErrorRecord aggregate_errors(std::size_t n, Metric metric, double p,
                             std::span<const StrongErrorSample> samples, std::size_t pair_budget) {
  if (samples.empty()) throw ConfigError("no error samples to aggregate");
  ErrorRecord rec{n, p, metric, 0.0, 0.0, samples.size()};
  std::vector<double> values(samples.size());
  switch (metric) {
    case Metric::sup_grid: {
      for (std::size_t s = 0; s < samples.size(); ++s) values[s] = samples[s].sup;
      const auto m = lp_moment(values, p);
      rec.estimate = m.estimate;
      rec.std_error = m.std_error;
      break;
    }
    case Metric::lp_terminal: {
      for (std::size_t s = 0; s < samples.size(); ++s) values[s] = samples[s].terminal;
      const auto m = lp_moment(values, p);
      rec.estimate = m.estimate;
      rec.std_error = m.std_error;
      break;
    }
    case Metric::cp_half: {
      MomentEstimate sup_moment;
      const std::size_t points = samples.front().diff.points();
      for (std::size_t k = 0; k < points; ++k) {
        for (std::size_t s = 0; s < samples.size(); ++s) values[s] = norm_row(samples[s].diff.row(k));
        const auto m = lp_moment(values, p);
        if (m.estimate > sup_moment.estimate || k == 0) sup_moment = m;
      }
      std::vector<SamplePath> diffs;
      diffs.reserve(samples.size());
      for (const auto& s : samples) diffs.push_back(s.diff);
      const auto semi = cp_half_seminorm(diffs, p, pair_budget);
      rec.estimate = sup_moment.estimate + semi.estimate;
      rec.std_error = std::hypot(sup_moment.std_error, semi.std_error);
      break;
    }
  }
  return rec;
}

RateReport fit_rate(std::vector<ErrorRecord> records) {
  if (records.size() < 3) throw ConfigError("need ≥ 3 resolutions to fit a rate");
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].n <= records[i - 1].n) throw ConfigError("resolutions must be strictly increasing");
    if (records[i].metric != records[0].metric || records[i].p != records[0].p)
      throw ConfigError("all records of a rate fit must share metric and p");
  }
  RateReport report;
  report.records = std::move(records);
  for (const auto& r : report.records) {
    if (!(r.estimate > 0.0)) {
      report.exact = true;
      return report;
    }
  }

  const std::size_t k = report.records.size();
  std::vector<double> xs(k), ys(k);
  for (std::size_t i = 0; i < k; ++i) {
    xs[i] = std::log(static_cast<double>(report.records[i].n));
    ys[i] = std::log(report.records[i].estimate);
  }
  const double mx = compensated_sum(xs) / static_cast<double>(k);
  const double my = compensated_sum(ys) / static_cast<double>(k);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  LogLogFit& fit = report.fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    sse += r * r;
  }
  fit.r_squared = syy > 0.0 ? std::max(0.0, 1.0 - sse / syy) : 1.0;
  const double dof = static_cast<double>(k - 2);
  fit.slope_std_error = std::sqrt(sse / dof / sxx);
  const boost::math::students_t dist(dof);
  const double t = boost::math::quantile(boost::math::complement(dist, 0.025));
  fit.ci_low = fit.slope - t * fit.slope_std_error;
  fit.ci_high = fit.slope + t * fit.slope_std_error;
  return report;
}

void write_errors_csv(std::ostream& out, const RateReport& report) {
  out << "n,metric,p,estimate,std_error,samples\n";
  for (const auto& r : report.records)
    out << r.n << ',' << to_string(r.metric) << ',' << format_double(r.p) << ','
        << format_double(r.estimate) << ',' << format_double(r.std_error) << ',' << r.samples << '\n';
}

std::string rate_summary_json(const RateReport& report) {
  nlohmann::ordered_json j;
  if (report.exact) {
    j["status"] = "exact";
  } else {
    j["status"] = "fitted";
    j["slope"] = report.fit.slope;
    j["intercept"] = report.fit.intercept;
    j["ci_low"] = report.fit.ci_low;
    j["ci_high"] = report.fit.ci_high;
    j["r_squared"] = report.fit.r_squared;
  }
  if (!report.records.empty()) {
    j["metric"] = to_string(report.records.front().metric);
    j["p"] = report.records.front().p;
  }
  return j.dump(2) + "\n";
}

const char* to_string(Verdict v) {
  return v == Verdict::confirmed ? "confirmed" : "inconclusive";
}

PathVerdict optimality_verdict(std::span<const OptimalityRecord> records, double threshold,
                               double min_abs_c) {
  if (records.size() < 3) throw ConfigError("optimality verdict needs at least 3 resolutions");
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].n != 2 * records[i - 1].n)
      throw ConfigError("optimality resolutions must double");
    if (!(records[i].provenance == records[0].provenance))
      throw ConfigError("optimality records must share one noise path");
  }

  PathVerdict v;
  for (const auto& r : records) v.deviations.push_back(r.terminal_deviation());
  v.c_norm = records.back().c_terminal_norm();
  v.eligible = v.c_norm >= min_abs_c;

  const std::size_t first = records.size() >= 4 ? records.size() - 4 : 0;
  v.monotone = true;
  for (std::size_t i = first + 1; i < records.size(); ++i)
    if (v.deviations[i] > v.deviations[i - 1]) v.monotone = false;
  v.final_relative_deviation = v.deviations.back() / std::max(v.c_norm, min_abs_c);
  v.verdict = v.monotone && v.final_relative_deviation <= threshold ? Verdict::confirmed
                                                                   : Verdict::inconclusive;
  return v;
}

double OptimalitySummary::confirmed_fraction() const {
  if (eligible == 0) return confirmed == paths ? 1.0 : 0.0;
  return static_cast<double>(confirmed_eligible) / static_cast<double>(eligible);
}

OptimalitySummary summarize(std::span<const PathVerdict> verdicts) {
  OptimalitySummary s;
  s.paths = verdicts.size();
  for (const auto& v : verdicts) {
    const bool ok = v.verdict == Verdict::confirmed;
    if (ok) ++s.confirmed;
    if (v.eligible) {
      ++s.eligible;
      if (ok) ++s.confirmed_eligible;
    }
  }
  return s;
}

}  // namespace fbmlab
