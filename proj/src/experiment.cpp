#include "fbmlab/experiment.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <sstream>

#include "fbmlab/errors.hpp"
#include "fbmlab/hurst.hpp"
#include "fbmlab/parallel.hpp"
#include "fbmlab/solvers.hpp"
#include "json.hpp"

namespace fbmlab {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

template <class T>
T get_field(const json& j, const char* key, const T& fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

std::size_t get_count(const json& j, const char* key, std::size_t fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_number_integer() || it->get<long long>() < 0)
    throw ConfigError(std::string("config key '") + key + "' must be a nonnegative integer");
  return it->get<std::size_t>();
}

NoiseProvenance provenance_for(const ExperimentConfig& c, std::size_t sample) {
  return NoiseProvenance{c.master_seed, sample, c.H, false};
}

NoiseHierarchy sample_hierarchy(const ExperimentConfig& c, const HurstParams& params,
                                std::size_t sample) {
  const RngSpec rng{c.master_seed};
  SamplePath base = fbm_path(params, UniformGrid(c.n_ref), c.d, rng, sample);
  return lift(std::move(base), params.levels());
}

template <class Body>
void run_samples(std::size_t count, std::size_t threads, Body&& body) {
  // NumericalError carries the step; the sample index is attached here.
  parallel_for(count, threads, [&](std::size_t s) {
    try {
      body(s);
    } catch (const NumericalError& e) {
      std::ostringstream msg;
      msg << "sample " << s << ": " << e.what();
      throw SampleAbort(msg.str(), s, e.step());
    }
  });
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const char* known[] = {"H", "d", "drift", "x0", "x0n", "n_list", "n_ref", "samples", "p",
                                "master_seed", "metric", "output_dir", "threshold", "min_abs_c",
                                "pair_budget", "max_lag"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(std::begin(known), std::end(known), key) == std::end(known))
      throw ConfigError("unknown config key '" + key + "'");
  }

  ExperimentConfig c;
  c.H = get_field(j, "H", c.H);
  c.d = get_count(j, "d", c.d);
  if (auto it = j.find("drift"); it != j.end()) {
    if (!it->is_object() || !it->contains("name"))
      throw ConfigError("drift must be an object {\"name\": ..., \"params\": {...}}");
    c.drift.name = get_field<std::string>(*it, "name", "");
    c.drift.params = get_field<std::map<std::string, double>>(*it, "params", {});
    for (const auto& [key, value] : it->items())
      if (key != "name" && key != "params") throw ConfigError("unknown drift key '" + key + "'");
  }
  // A scalar initial point is broadcast to every component.
  auto point = [&](const char* key, const std::vector<double>& fallback) {
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (it->is_number()) return std::vector<double>(c.d, it->get<double>());
    return get_field<std::vector<double>>(j, key, fallback);
  };
  const bool d_given = j.contains("d");
  c.x0 = point("x0", d_given ? std::vector<double>(c.d, 0.0) : c.x0);
  c.x0n = point("x0n", c.x0);
  c.n_list = get_field(j, "n_list", c.n_list);
  c.n_ref = get_count(j, "n_ref", c.n_ref);
  c.samples = get_count(j, "samples", c.samples);
  c.p = get_field(j, "p", c.p);
  if (auto it = j.find("master_seed"); it != j.end()) {
    if (!it->is_number_unsigned())
      throw ConfigError("master_seed must be a nonnegative integer");
    c.master_seed = it->get<std::uint64_t>();
  }
  c.metric = parse_metric(get_field<std::string>(j, "metric", to_string(c.metric)));
  c.output_dir = get_field(j, "output_dir", c.output_dir);
  c.threshold = get_field(j, "threshold", c.threshold);
  c.min_abs_c = get_field(j, "min_abs_c", c.min_abs_c);
  c.pair_budget = get_count(j, "pair_budget", c.pair_budget);
  c.max_lag = get_count(j, "max_lag", c.max_lag);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const ExperimentConfig& c) {
  ordered_json j;
  j["H"] = c.H;
  j["d"] = c.d;
  j["drift"] = {{"name", c.drift.name}, {"params", c.drift.params}};
  j["x0"] = c.x0;
  j["x0n"] = c.x0n;
  j["n_list"] = c.n_list;
  j["n_ref"] = c.n_ref;
  j["samples"] = c.samples;
  j["p"] = c.p;
  j["master_seed"] = c.master_seed;
  j["metric"] = to_string(c.metric);
  j["output_dir"] = c.output_dir;
  j["threshold"] = c.threshold;
  j["min_abs_c"] = c.min_abs_c;
  j["pair_budget"] = c.pair_budget;
  j["max_lag"] = c.max_lag;
  return j.dump(2) + "\n";
}

void validate_config(const ExperimentConfig& c, Command command) {
  const HurstParams params(c.H);
  if (c.d == 0) throw ConfigError("dimension d must be positive");
  if (c.n_ref == 0) throw ConfigError("n_ref must be positive");
  if (command == Command::noise || command == Command::covcheck) {
    if (command == Command::noise && !params.regular())
      throw ConfigError("noise command needs H > 1 (H non-integer)");
    if (command == Command::covcheck) {
      if (c.samples < 2) throw ConfigError("samples must be at least 2");
      if (c.max_lag >= c.n_ref) throw ConfigError("max_lag must be below n_ref");
    }
    return;
  }

  if (!params.regular()) throw ConfigError("rate and optimality experiments need H > 1 (H non-integer)");
  if (c.x0.size() != c.d || c.x0n.size() != c.d) throw ConfigError("x0 and x0n must have d components");
  if (c.samples < 2) throw ConfigError("samples M must be at least 2");
  if (!(c.p >= 1.0)) throw ConfigError("moment order p must be at least 1");
  if (c.n_list.size() < 3) throw ConfigError("need ≥ 3 resolutions in n_list");
  for (std::size_t i = 0; i < c.n_list.size(); ++i) {
    if (i > 0 && c.n_list[i] <= c.n_list[i - 1]) throw ConfigError("n_list must be strictly increasing");
    if (c.n_list[i] == 0 || c.n_ref % c.n_list[i] != 0)
      throw ConfigError("every n in n_list must divide n_ref = " + std::to_string(c.n_ref));
  }
  if (c.pair_budget == 0) throw ConfigError("pair_budget must be positive");

  const Drift drift = make_drift(c.drift, c.d);
  if (command == Command::rate) {
    require_admissible(drift, c.H);
    return;
  }
  // optimality
  if (!drift.has_gradient())
    throw ConfigError("drift '" + drift.name + "' has no gradient; the optimality study needs b in C^1");
  if (c.x0 != c.x0n) throw ConfigError("the optimality study needs x0n = x0");
  if (c.n_ref % 2 != 0) throw ConfigError("optimality needs an even n_ref");
  for (std::size_t i = 1; i < c.n_list.size(); ++i)
    if (c.n_list[i] != 2 * c.n_list[i - 1]) throw ConfigError("optimality n_list must double");
  for (std::size_t n : c.n_list)
    if ((c.n_ref / 2) % n != 0) throw ConfigError("every n in n_list must divide n_ref / 2");
  if (!(c.threshold > 0.0)) throw ConfigError("threshold must be positive");
}

NoiseHierarchy run_noise(const ExperimentConfig& c) {
  validate_config(c, Command::noise);
  return sample_hierarchy(c, HurstParams(c.H), 0);
}

void write_noise_csv(std::ostream& out, const NoiseHierarchy& h) {
  const std::size_t d = h.dim();
  out << 't';
  for (std::size_t level = 0; level <= h.depth(); ++level)
    for (std::size_t c = 0; c < d; ++c) out << ",level" << level << '_' << (c + 1);
  out << '\n';
  for (std::size_t i = 0; i < h.grid().points(); ++i) {
    out << format_double(h.grid().gridpoint(i));
    for (double v : h.base().row(i)) out << ',' << format_double(v);
    for (const auto& level : h.levels())
      for (double v : level.row(i)) out << ',' << format_double(v);
    out << '\n';
  }
}

RateResult run_rate(const ExperimentConfig& c, std::size_t threads) {
  validate_config(c, Command::rate);
  const HurstParams params(c.H);
  const Drift drift = make_drift(c.drift, c.d);

  std::vector<std::vector<StrongErrorSample>> per_sample(c.samples);
  run_samples(c.samples, threads, [&](std::size_t s) {
    const auto prov = provenance_for(c, s);
    const NoiseHierarchy h = sample_hierarchy(c, params, s);
    const EmSolution ref = reference_solution(drift, c.x0, h, c.n_ref, prov);
    for (std::size_t n : c.n_list) {
      const EmSolution em = euler_maruyama(drift, c.x0n, restrict(h.top(), n), prov);
      per_sample[s].push_back(strong_error_sample(ref, em));
    }
  });

  RateResult result;
  result.samples_by_n.resize(c.n_list.size());
  for (std::size_t j = 0; j < c.n_list.size(); ++j)
    for (auto& sample : per_sample) result.samples_by_n[j].push_back(std::move(sample[j]));

  std::vector<ErrorRecord> records;
  for (std::size_t j = 0; j < c.n_list.size(); ++j)
    records.push_back(aggregate_errors(c.n_list[j], c.metric, c.p, result.samples_by_n[j], c.pair_budget));
  result.report = fit_rate(std::move(records));
  return result;
}

OptimalityResult run_optimality(const ExperimentConfig& c, std::size_t threads) {
  validate_config(c, Command::optimality);
  const HurstParams params(c.H);
  const Drift drift = make_drift(c.drift, c.d);

  OptimalityResult result;
  result.paths.resize(c.samples);
  run_samples(c.samples, threads, [&](std::size_t s) {
    const auto prov = provenance_for(c, s);
    const NoiseHierarchy h = sample_hierarchy(c, params, s);
    const EmSolution ref = reference_solution(drift, c.x0, h, c.n_ref, prov);
    const SamplePath limit = optimality_ode(drift, ref, derivative_of_top(h));
    const EmSolution extrapolated = richardson_reference(drift, h, ref);
    auto& path = result.paths[s];
    for (std::size_t n : c.n_list) {
      const EmSolution em = euler_maruyama(drift, c.x0n, restrict(h.top(), n), prov);
      path.records.push_back(make_optimality_record(extrapolated, em, limit));
    }
    path.verdict = optimality_verdict(path.records, c.threshold, c.min_abs_c);
  });

  std::vector<PathVerdict> verdicts;
  for (const auto& p : result.paths) verdicts.push_back(p.verdict);
  result.summary = summarize(verdicts);
  return result;
}

void write_optimality_csv(std::ostream& out, const OptimalityResult& result) {
  if (result.paths.empty()) return;
  const std::size_t d = result.paths.front().records.front().e_n.dim();
  out << "path,n";
  for (std::size_t i = 1; i <= d; ++i) out << ",e_n_" << i;
  for (std::size_t i = 1; i <= d; ++i) out << ",c_" << i;
  out << ",deviation,verdict\n";
  for (std::size_t s = 0; s < result.paths.size(); ++s) {
    const auto& path = result.paths[s];
    for (const auto& r : path.records) {
      out << s << ',' << r.n;
      for (double v : r.e_terminal()) out << ',' << format_double(v);
      for (double v : r.c_terminal()) out << ',' << format_double(v);
      out << ',' << format_double(r.terminal_deviation()) << ',' << to_string(path.verdict.verdict) << '\n';
    }
  }
}

std::string optimality_summary_json(const ExperimentConfig& c, const OptimalityResult& result) {
  const auto& s = result.summary;
  const bool confirmed = s.confirmed_fraction() >= kOptimalityConfirmFraction;
  ordered_json j;
  j["verdict"] = confirmed ? "confirmed" : "inconclusive";
  j["paths"] = s.paths;
  j["eligible"] = s.eligible;
  j["confirmed_eligible"] = s.confirmed_eligible;
  j["confirmed"] = s.confirmed;
  j["confirmed_fraction"] = s.confirmed_fraction();
  j["required_fraction"] = kOptimalityConfirmFraction;
  j["threshold"] = c.threshold;
  j["min_abs_c"] = c.min_abs_c;
  return j.dump(2) + "\n";
}

std::vector<AutocovarianceRow> run_covcheck(const ExperimentConfig& c) {
  validate_config(c, Command::covcheck);
  const HurstParams params(c.H);
  return autocovariance_check(params.frac(), c.n_ref, c.samples, c.max_lag, RngSpec{c.master_seed});
}

void write_covcheck_csv(std::ostream& out, const std::vector<AutocovarianceRow>& rows) {
  out << "lag,empirical,exact,std_error,z\n";
  for (const auto& r : rows)
    out << r.lag << ',' << format_double(r.empirical) << ',' << format_double(r.exact) << ','
        << format_double(r.std_error) << ',' << format_double(r.z_score()) << '\n';
}

bool covcheck_passed(const std::vector<AutocovarianceRow>& rows) {
  return std::all_of(rows.begin(), rows.end(),
                     [](const auto& r) { return std::abs(r.z_score()) <= kCovcheckZLimit; });
}

}  // namespace fbmlab
