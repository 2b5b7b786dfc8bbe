#ifndef SIGPATH_EXPERIMENT_HPP
#define SIGPATH_EXPERIMENT_HPP

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sigpath/error.hpp"
#include "sigpath/parallel.hpp"
#include "sigpath/paths.hpp"
#include "sigpath/regress.hpp"
#include "sigpath/signature.hpp"
#include "sigpath/stochastic.hpp"

namespace sigpath {

struct ExperimentConfig {
  std::string kind;
  std::uint64_t seed = 0;
  std::size_t d = 1;
  double T = 1.0;
  std::vector<std::size_t> depths;
  std::vector<std::size_t> levels;
  std::size_t samples = 0;
  double p = 2.0;
  double alpha = 0.4;
  std::vector<double> betas;
  double gamma = 2.0;
  std::size_t m = 16;
  std::string target;      // functional
  std::string field;       // ode: vector field name
  double a = 0.0;          // ode, sde
  double b = 0.0;
  std::vector<double> y0;  // ode, sde
  std::size_t substeps = 8;
  std::optional<double> lambda;  // empty: scale-aware default
  std::size_t reference_depth = 14;
  std::size_t eval_depth = 0;
  std::string functional;  // levy
  std::string input;       // sig
  std::string output;

  // Every resolved input, keys sorted; the hash is taken over its compact dump.
  nlohmann::json canonical() const {
    nlohmann::json j;
    j["kind"] = kind;
    j["seed"] = seed;
    if (kind == "sig") {
      j["input"] = input;
      j["levels"] = levels;
      return j;
    }
    j["d"] = d;
    j["T"] = T;
    j["depths"] = depths;
    j["samples"] = samples;
    j["p"] = p;
    if (kind == "functional" || kind == "ode" || kind == "sde") {
      j["levels"] = levels;
      j["lambda"] = lambda ? nlohmann::json(*lambda) : nlohmann::json("default");
    }
    if (kind == "functional") j["target"] = target;
    if (kind == "ode") {
      j["field"] = field;
      j["substeps"] = substeps;
    }
    if (kind == "ode" || kind == "sde") {
      j["a"] = a;
      j["b"] = b;
      j["y0"] = y0;
    }
    if (kind == "sde" || kind == "levy") {
      j["reference_depth"] = reference_depth;
      j["eval_depth"] = eval_depth;
    }
    if (kind == "levy") j["functional"] = functional;
    if (kind == "moments") {
      j["alpha"] = alpha;
      j["betas"] = betas;
      j["gamma"] = gamma;
      j["m"] = m;
    }
    return j;
  }

  std::uint64_t hash() const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : canonical().dump()) {
      h ^= c;
      h *= 0x100000001b3ull;
    }
    return h;
  }

  std::string hash_hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash()));
    return buf;
  }
};

namespace detail {

inline void config_require(bool cond, const std::string& msg) {
  if (!cond) throw config_error(msg);
}

template <class T>
T get_as(const nlohmann::json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw config_error(std::string("config key '") + key + "' has the wrong type");
  }
}

template <class T>
void read_opt(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = get_as<T>(j, key);
}

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace detail

// Unknown keys are rejected so that typos do not silently fall back to defaults.
inline ExperimentConfig parse_config(const nlohmann::json& j, std::optional<std::uint64_t> seed_override = {}) {
  using detail::config_require;
  config_require(j.is_object(), "config must be a JSON object");
  static const std::set<std::string> known{
      "kind", "seed", "d", "T", "depths", "levels", "samples", "p", "alpha", "beta", "betas", "gamma", "m",
      "target", "field", "a", "b", "y0", "substeps", "lambda", "reference_depth", "eval_depth", "functional",
      "input", "output"};
  for (const auto& [k, v] : j.items()) config_require(known.count(k) > 0, "unknown config key '" + k + "'");
  config_require(j.contains("kind"), "config needs a 'kind'");

  ExperimentConfig c;
  c.kind = detail::get_as<std::string>(j, "kind");
  static const std::set<std::string> kinds{"sig", "functional", "ode", "sde", "levy", "moments"};
  config_require(kinds.count(c.kind) > 0, "unknown experiment kind '" + c.kind + "'");
  detail::read_opt(j, "seed", c.seed);
  if (seed_override) c.seed = *seed_override;
  detail::read_opt(j, "output", c.output);

  if (c.kind == "sig") {
    config_require(j.contains("input"), "sig experiments need an 'input' CSV");
    c.input = detail::get_as<std::string>(j, "input");
    c.levels = {2};
    detail::read_opt(j, "levels", c.levels);
    config_require(!c.levels.empty(), "levels must be non-empty");
    for (auto n : c.levels) config_require(n >= 1, "truncation levels must be at least 1");
    return c;
  }

  const bool regression = c.kind == "functional" || c.kind == "ode" || c.kind == "sde";
  if (c.kind == "levy") c.d = 2;
  detail::read_opt(j, "d", c.d);
  detail::read_opt(j, "T", c.T);
  c.samples = regression ? 2000 : 10000;
  detail::read_opt(j, "samples", c.samples);
  detail::read_opt(j, "p", c.p);
  detail::read_opt(j, "alpha", c.alpha);
  detail::read_opt(j, "gamma", c.gamma);
  detail::read_opt(j, "m", c.m);
  detail::read_opt(j, "reference_depth", c.reference_depth);

  if (c.kind == "levy")
    c.depths = {4, 5, 6, 7, 8, 9, 10};
  else if (c.kind == "sde")
    c.depths = {4, 6, 8};
  else
    c.depths = {8};
  detail::read_opt(j, "depths", c.depths);
  c.levels = {1, 2, 3, 4};
  detail::read_opt(j, "levels", c.levels);

  config_require(c.d >= 1, "d must be at least 1");
  config_require(c.T > 0.0 && std::isfinite(c.T), "T must be positive");
  config_require(!c.depths.empty(), "depths must be non-empty");
  for (auto n : c.depths) config_require(n <= max_lattice_depth, "depth exceeds " + std::to_string(max_lattice_depth));
  config_require(c.samples >= 10, "sample count must be at least 10");
  config_require(c.p >= 1.0, "p must be at least 1");
  config_require(c.alpha > 1.0 / 3.0 && c.alpha < 0.5, "alpha must lie in (1/3, 1/2) for Brownian experiments");

  if (regression) {
    config_require(!c.levels.empty(), "levels must be non-empty");
    for (auto n : c.levels) config_require(n >= 1, "truncation levels must be at least 1");
    if (j.contains("lambda")) {
      const auto& l = j.at("lambda");
      if (l.is_string()) {
        config_require(l.get<std::string>() == "default", "lambda must be a number or \"default\"");
      } else {
        config_require(l.is_number(), "lambda must be a number or \"default\"");
        c.lambda = l.get<double>();
        config_require(*c.lambda >= 0.0, "lambda must be non-negative");
      }
    }
  }

  if (c.kind == "functional") {
    config_require(j.contains("target"), "functional experiments need a 'target'");
    c.target = detail::get_as<std::string>(j, "target");
    static const std::set<std::string> targets{"terminal-square", "integral", "running-max", "exp-terminal"};
    config_require(targets.count(c.target) > 0, "unknown target '" + c.target + "'");
  }

  if (c.kind == "ode") {
    config_require(j.contains("field"), "ode experiments need a 'field'");
    c.field = detail::get_as<std::string>(j, "field");
    detail::read_opt(j, "a", c.a);
    detail::read_opt(j, "b", c.b);
    detail::read_opt(j, "substeps", c.substeps);
    config_require(c.substeps >= 1, "substeps must be at least 1");
    c.y0 = c.field == "zero-drift-identity" ? std::vector<double>(c.d, 0.0) : std::vector<double>{1.0};
    detail::read_opt(j, "y0", c.y0);
    config_require(!c.y0.empty(), "y0 must be non-empty");
    try {
      (void)VectorField::by_name(c.field, c.a, c.b, c.y0.size(), c.d);
    } catch (const invalid_input& e) {
      throw config_error(e.what());
    }
  }

  if (c.kind == "sde") {
    config_require(c.d == 1, "sde experiments are scalar (d = 1)");
    detail::read_opt(j, "a", c.a);
    detail::read_opt(j, "b", c.b);
    c.y0 = {1.0};
    detail::read_opt(j, "y0", c.y0);
    config_require(c.y0.size() == 1, "sde experiments need a scalar y0");
  }

  if (c.kind == "sde" || c.kind == "levy") {
    config_require(c.reference_depth <= max_lattice_depth, "reference depth exceeds " + std::to_string(max_lattice_depth));
    const std::size_t deepest = *std::max_element(c.depths.begin(), c.depths.end());
    if (c.kind == "sde")
      config_require(c.reference_depth >= deepest + 4, "reference depth must exceed every experiment depth by at least 4");
    else
      config_require(c.reference_depth > deepest, "reference depth must exceed every experiment depth");
    c.eval_depth = c.kind == "sde" ? deepest : c.reference_depth;
    detail::read_opt(j, "eval_depth", c.eval_depth);
    config_require(c.eval_depth <= c.reference_depth, "eval depth cannot exceed the reference depth");
  }

  if (c.kind == "levy") {
    config_require(c.d == 2, "levy experiments need d = 2");
    c.functional = "levy-area";
    detail::read_opt(j, "functional", c.functional);
    config_require(c.functional == "levy-area" || c.functional == "time" || c.functional == "coordinate",
                   "unknown levy functional '" + c.functional + "'");
  }

  if (c.kind == "moments") {
    c.betas = {0.01};
    if (j.contains("beta")) c.betas = {detail::get_as<double>(j, "beta")};
    detail::read_opt(j, "betas", c.betas);
    config_require(!c.betas.empty(), "betas must be non-empty");
    for (double b : c.betas) config_require(b > 0.0, "beta must be positive");
    config_require(c.gamma >= 1.0, "gamma must be at least 1");
    config_require(c.m >= 1, "m must be at least 1");
  }
  return c;
}

inline ExperimentConfig parse_config(const std::string& text, std::optional<std::uint64_t> seed_override = {}) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw config_error(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j, seed_override);
}

struct ExperimentResult {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  nlohmann::ordered_json details;  // fitted functionals, summaries

  void add_row(std::vector<std::string> r) {
    detail::require(r.size() == header.size(), "row width differs from header");
    rows.push_back(std::move(r));
  }

  std::string header_line() const {
    std::string s;
    for (std::size_t i = 0; i < header.size(); ++i) s += (i ? "," : "") + header[i];
    return s;
  }

  std::string csv(bool with_header = true) const {
    std::string s = with_header ? header_line() + "\n" : "";
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) s += (i ? "," : "") + r[i];
      s += "\n";
    }
    return s;
  }
};

namespace detail {

inline void check_error(double e, const char* what) {
  if (!std::isfinite(e) || e < 0.0) throw numerical_error(std::string(what) + " is not a finite non-negative number");
}

inline std::vector<double> dyadic_times(double horizon, std::size_t depth) {
  return Partition::uniform(horizon, std::size_t{1} << depth).times();
}

// Fits every requested level on nested column prefixes of one feature matrix.
inline void fit_levels(const ExperimentConfig& c, ExperimentResult& res, const FeatureMatrix& f,
                       const std::vector<double>& targets, const Split& split, std::size_t depth,
                       const std::string& label, std::size_t excluded) {
  for (std::size_t n : c.levels) {
    const FeatureMatrix fn = f.truncated(n);
    const double lam = c.lambda ? *c.lambda : default_lambda(fn, split);
    const FitReport rep = fit(fn, targets, lam, split, c.p);
    check_error(rep.train_error, "train error");
    check_error(*rep.test_error, "test error");
    if (!rep.optimal()) throw numerical_error("least-squares optimality residual above tolerance at depth " +
                                              std::to_string(depth) + ", level " + std::to_string(n));
    res.add_row({c.hash_hex(), c.kind, label, std::to_string(depth), std::to_string(n), std::to_string(c.samples),
                 std::to_string(rep.train_samples), std::to_string(rep.test_samples), std::to_string(excluded),
                 format_double(lam), format_double(rep.train_error), format_double(*rep.test_error),
                 format_double(rep.gram_min_eigenvalue), format_double(rep.gram_max_eigenvalue),
                 std::to_string(rep.rank)});
    auto j = to_json(rep);
    j["depth"] = depth;
    j["level"] = n;
    res.details["fits"].push_back(j);
  }
}

inline std::vector<std::string> regression_header() {
  return {"config_hash", "kind",    "target",     "depth",       "level",      "samples",        "train_samples",
          "test_samples", "excluded", "lambda",    "train_error", "test_error", "gram_min_eig", "gram_max_eig",
          "rank"};
}

inline Split without(const Split& s, const std::vector<char>& excluded) {
  Split out;
  for (auto i : s.train)
    if (!excluded[i]) out.train.push_back(i);
  for (auto i : s.test)
    if (!excluded[i]) out.test.push_back(i);
  return out;
}

inline double functional_target(const std::string& name, const PiecewiseLinearPath& w) {
  const std::size_t last = w.size() - 1;
  if (name == "terminal-square") return w.point(last)[0] * w.point(last)[0];
  if (name == "exp-terminal") return std::exp(std::clamp(w.point(last)[0], -10.0, 10.0));
  if (name == "integral") {
    double s = 0.0;
    for (std::size_t k = 0; k < last; ++k) s += 0.5 * (w.point(k)[0] + w.point(k + 1)[0]) * (w.time(k + 1) - w.time(k));
    return s;
  }
  double mx = w.point(0)[0];
  for (std::size_t k = 1; k <= last; ++k) mx = std::max(mx, w.point(k)[0]);
  return mx;
}

}  // namespace detail

// Regression of a named terminal functional of W^1 on terminal signatures.
inline ExperimentResult run_functional(const ExperimentConfig& c) {
  ExperimentResult res;
  res.header = detail::regression_header();
  const Split split = split_samples(c.samples, c.seed);
  const std::size_t top = *std::max_element(c.levels.begin(), c.levels.end());
  for (std::size_t depth : c.depths) {
    std::vector<double> targets(c.samples);
    const auto f = build_features_with(c.samples, c.d + 1, top, FeatureMode::terminal, {}, [&](std::size_t i) {
      const auto w = interpolate(sample_brownian(c.seed, i, c.d, c.T, depth), depth);
      targets[i] = detail::functional_target(c.target, w);
      return time_extend(w);
    });
    detail::fit_levels(c, res, f, targets, split, depth, c.target, 0);
  }
  return res;
}

// Random ODE along each interpolated driver, fitted in stopped mode at the depth-n breakpoints.
inline ExperimentResult run_ode(const ExperimentConfig& c) {
  ExperimentResult res;
  res.header = detail::regression_header();
  const auto vf = VectorField::by_name(c.field, c.a, c.b, c.y0.size(), c.d);
  const Split split = split_samples(c.samples, c.seed);
  const std::size_t top = *std::max_element(c.levels.begin(), c.levels.end());
  for (std::size_t depth : c.depths) {
    const auto times = detail::dyadic_times(c.T, depth);
    const std::size_t per = times.size();
    std::vector<double> targets(c.samples * per, 0.0);
    std::vector<char> excluded(c.samples, 0);
    const auto f = build_features_with(c.samples, c.d + 1, top, FeatureMode::stopped, times, [&](std::size_t i) {
      auto x = time_extend(interpolate(sample_brownian(c.seed, i, c.d, c.T, depth), depth));
      try {
        const auto y = solve_ode_pl(x, vf, c.y0, c.substeps);
        for (std::size_t k = 0; k < per; ++k) targets[i * per + k] = y.point(k)[0];
      } catch (const numerical_error&) {
        excluded[i] = 1;
      }
      return x;
    });
    const auto count = static_cast<std::size_t>(std::count(excluded.begin(), excluded.end(), 1));
    const Split kept = detail::without(split, excluded);
    if (kept.train.empty() || kept.test.empty()) throw numerical_error("every ODE sample blew up");
    detail::fit_levels(c, res, f, targets, kept, depth, c.field, count);
  }
  res.details["vector_field"] = {{"name", c.field}, {"growth_constant", vf.growth_constant()}};
  return res;
}

// Exact Stratonovich GBM on the reference lattice, fitted on depth-n interpolation
// signatures over a common evaluation grid.
inline ExperimentResult run_sde(const ExperimentConfig& c) {
  ExperimentResult res;
  res.header = detail::regression_header();
  const Split split = split_samples(c.samples, c.seed);
  const std::size_t top = *std::max_element(c.levels.begin(), c.levels.end());
  const auto times = detail::dyadic_times(c.T, c.eval_depth);
  const std::size_t per = times.size();
  for (std::size_t depth : c.depths) {
    std::vector<double> targets(c.samples * per);
    const auto f = build_features_with(c.samples, 2, top, FeatureMode::stopped, times, [&](std::size_t i) {
      const auto lat = sample_brownian(c.seed, i, 1, c.T, c.reference_depth);
      const auto y = sde_exact_gbm(lat, c.reference_depth, c.a, c.b, c.y0[0], times);
      std::copy(y.begin(), y.end(), targets.begin() + static_cast<std::ptrdiff_t>(i * per));
      return time_extend(interpolate(lat, depth));
    });
    detail::fit_levels(c, res, f, targets, split, depth, "gbm", 0);
  }
  return res;
}

namespace detail {

struct CompiledFunctional {
  std::vector<std::pair<std::size_t, double>> terms;
  double operator()(const TruncatedTensor& g) const {
    double s = 0.0;
    for (const auto& [i, c] : terms) s += c * g.data()[i];
    return s;
  }
};

inline CompiledFunctional compile(const LinearFunctional& l) {
  CompiledFunctional cf;
  for (const auto& [w, c] : l.coefficients()) cf.terms.emplace_back(flat_index(w, l.dim()), c);
  return cf;
}

// l along the depth-n interpolation of the lattice, at every point of the depth-e grid.
// The depth-n path is folded over the finer of the two grids; inserting breakpoints on a
// straight piece leaves its signature unchanged, so the values are exact.
inline std::vector<double> functional_on_grid(const BrownianLattice& lat, std::size_t n, std::size_t e,
                                              const LinearFunctional& l, const CompiledFunctional& cf) {
  const std::size_t g = std::max(n, e), dim = lat.dim;
  const std::size_t steps = std::size_t{1} << g;
  const std::size_t coarse = std::size_t{1} << (g - n);  // fold steps per depth-n segment
  const std::size_t every = std::size_t{1} << (g - e);   // fold steps per eval interval
  const std::size_t lat_stride = std::size_t{1} << (lat.depth - n);
  const double h = lat.horizon / static_cast<double>(steps);
  SignatureFold fold(dim + 1, l.level());
  std::vector<double> inc(dim + 1);
  std::vector<double> out;
  out.reserve((std::size_t{1} << e) + 1);
  out.push_back(cf(fold.value()));
  for (std::size_t s = 0; s < steps; ++s) {
    const std::size_t seg = s / coarse;
    inc[0] = h;
    for (std::size_t c = 0; c < dim; ++c)
      inc[c + 1] = (lat.value((seg + 1) * lat_stride, c) - lat.value(seg * lat_stride, c)) / static_cast<double>(coarse);
    fold.push(inc);
    if ((s + 1) % every == 0) out.push_back(cf(fold.value()));
  }
  return out;
}

inline LinearFunctional levy_functional(const std::string& name) {
  if (name == "time") {
    LinearFunctional l(3, 1);
    l.set(Word{0}, 1.0);
    return l;
  }
  if (name == "coordinate") {
    LinearFunctional l(3, 1);
    l.set(Word{1}, 1.0);
    return l;
  }
  LinearFunctional l(3, 2);
  l.set(Word{1, 2}, 0.5);
  l.set(Word{2, 1}, -0.5);
  return l;
}

}  // namespace detail

// L^p distance between l on depth-n streams and on the reference stream, per depth,
// with the log2 slope of the error against depth.
inline ExperimentResult run_levy(const ExperimentConfig& c) {
  ExperimentResult res;
  res.header = {"config_hash", "kind", "functional", "depth", "reference_depth", "eval_depth",
                "samples",     "error", "std_error", "log2_error"};
  const auto l = detail::levy_functional(c.functional);
  const auto cf = detail::compile(l);
  const auto w = trapezoid_weights(detail::dyadic_times(c.T, c.eval_depth));
  const std::size_t nd = c.depths.size();
  std::vector<double> acc(c.samples * nd);
  parallel_for(c.samples, [&](std::size_t i) {
    const auto lat = sample_brownian(c.seed, i, 2, c.T, c.reference_depth);
    const auto ref = detail::functional_on_grid(lat, c.reference_depth, c.eval_depth, l, cf);
    for (std::size_t j = 0; j < nd; ++j) {
      const auto v = detail::functional_on_grid(lat, c.depths[j], c.eval_depth, l, cf);
      double s = 0.0;
      for (std::size_t k = 0; k < v.size(); ++k) s += w[k] * std::pow(std::abs(v[k] - ref[k]), c.p);
      acc[i * nd + j] = s;
    }
  });

  std::vector<double> xs, ys;
  nlohmann::ordered_json table = nlohmann::ordered_json::array();
  for (std::size_t j = 0; j < nd; ++j) {
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < c.samples; ++i) {
      s1 += acc[i * nd + j];
      s2 += acc[i * nd + j] * acc[i * nd + j];
    }
    const double n = static_cast<double>(c.samples);
    const double mean = s1 / n;
    const double se_mean = std::sqrt(std::max(0.0, s2 / n - mean * mean) / n);
    const double err = std::pow(mean, 1.0 / c.p);
    const double se = err > 0.0 ? se_mean * err / (c.p * mean) : 0.0;
    detail::check_error(err, "distance");
    const double lg = std::log2(err);
    if (err > 0.0) {
      xs.push_back(static_cast<double>(c.depths[j]));
      ys.push_back(lg);
    }
    res.add_row({c.hash_hex(), c.kind, c.functional, std::to_string(c.depths[j]), std::to_string(c.reference_depth),
                 std::to_string(c.eval_depth), std::to_string(c.samples), detail::format_double(err),
                 detail::format_double(se), detail::format_double(lg)});
    table.push_back({{"depth", c.depths[j]}, {"error", err}, {"std_error", se}});
  }
  res.details["errors"] = table;
  if (xs.size() >= 2 && xs.size() == nd) {
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) mx += xs[k] / xs.size(), my += ys[k] / ys.size();
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) sxy += (xs[k] - mx) * (ys[k] - my), sxx += (xs[k] - mx) * (xs[k] - mx);
    res.details["slope"] = sxy / sxx;
  } else {
    res.details["slope"] = nullptr;
  }
  return res;
}

// Monte Carlo estimate of E[exp(beta p |W-hat^{pi_n}|_alpha^gamma)] per depth and beta.
inline ExperimentResult run_moments(const ExperimentConfig& c) {
  ExperimentResult res;
  res.header = {"config_hash", "kind",    "depth",     "alpha",         "beta",       "gamma",  "p",      "m",
                "samples",     "estimate", "std_error", "half_estimate", "half_ratio", "stable", "max_norm"};
  for (std::size_t depth : c.depths) {
    std::vector<double> norms(c.samples);
    parallel_for(c.samples, [&](std::size_t i) {
      norms[i] = holder_norm(time_extend(interpolate(sample_brownian(c.seed, i, c.d, c.T, depth), depth)), c.alpha, c.m);
    });
    const double max_norm = *std::max_element(norms.begin(), norms.end());
    for (double beta : c.betas) {
      double s1 = 0.0, s2 = 0.0, half = 0.0;
      const std::size_t nh = c.samples / 2;
      for (std::size_t i = 0; i < c.samples; ++i) {
        const double v = std::exp(beta * c.p * std::pow(norms[i], c.gamma));
        if (!std::isfinite(v))
          throw numerical_error("exponential overflow: sample " + std::to_string(i) + " has Hoelder norm " +
                                detail::format_double(norms[i]) + " at beta = " + detail::format_double(beta) +
                                "; lower beta");
        s1 += v;
        s2 += v * v;
        if (i < nh) half += v;
      }
      const double n = static_cast<double>(c.samples);
      const double est = s1 / n, se = std::sqrt(std::max(0.0, s2 / n - est * est) / n);
      const double half_est = half / static_cast<double>(nh), ratio = half_est / est;
      const bool stable = ratio >= 0.8 && ratio <= 1.25;
      detail::check_error(est, "moment estimate");
      res.add_row({c.hash_hex(), c.kind, std::to_string(depth), detail::format_double(c.alpha),
                   detail::format_double(beta), detail::format_double(c.gamma), detail::format_double(c.p),
                   std::to_string(c.m), std::to_string(c.samples), detail::format_double(est),
                   detail::format_double(se), detail::format_double(half_est), detail::format_double(ratio),
                   stable ? "1" : "0", detail::format_double(max_norm)});
    }
  }
  return res;
}

// Signature of the time-extended path in a CSV file.
inline nlohmann::ordered_json signature_json(const PiecewiseLinearPath& x, std::size_t level) {
  const auto g = signature(time_extend(x), level);
  nlohmann::ordered_json levels = nlohmann::ordered_json::array();
  for (std::size_t n = 0; n <= level; ++n) {
    const auto b = g.block(n);
    levels.push_back(std::vector<double>(b.begin(), b.end()));
  }
  return {{"dim", g.dim()}, {"level", level}, {"coeffs", levels}};
}

inline PiecewiseLinearPath load_path_csv(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw invalid_input("cannot open '" + file + "'");
  return read_path_csv(in);
}

inline ExperimentResult run_sig(const ExperimentConfig& c) {
  ExperimentResult res;
  res.header = {"config_hash", "kind", "level", "word", "coefficient"};
  const auto x = load_path_csv(c.input);
  for (std::size_t n : c.levels) {
    const auto g = signature(time_extend(x), n);
    const auto words = all_words(g.dim(), n);
    for (std::size_t k = 0; k < words.size(); ++k)
      res.add_row({c.hash_hex(), c.kind, std::to_string(n), "\"" + words[k].to_string() + "\"",
                   detail::format_double(g.data()[k])});
    res.details["signatures"].push_back(signature_json(x, n));
  }
  return res;
}

inline ExperimentResult run_experiment(const ExperimentConfig& c) {
  ExperimentResult res;
  if (c.kind == "sig") res = run_sig(c);
  else if (c.kind == "functional") res = run_functional(c);
  else if (c.kind == "ode") res = run_ode(c);
  else if (c.kind == "sde") res = run_sde(c);
  else if (c.kind == "levy") res = run_levy(c);
  else if (c.kind == "moments") res = run_moments(c);
  else throw config_error("unknown experiment kind '" + c.kind + "'");
  nlohmann::ordered_json meta;
  meta["config_hash"] = c.hash_hex();
  meta["config"] = c.canonical();
  for (auto& [k, v] : res.details.items()) meta[k] = v;
  res.details = std::move(meta);
  return res;
}

// The JSON sidecar sits next to the CSV with a .json extension.
inline std::string sidecar_path(const std::string& csv_path) {
  return std::filesystem::path(csv_path).replace_extension(".json").string();
}

// Writes the CSV (and its JSON sidecar). With append, an existing CSV must carry the
// same header; rows are added below it.
inline void write_result(const ExperimentResult& res, const std::string& csv_path, bool append = false) {
  bool fresh = true;
  if (append && std::filesystem::exists(csv_path) && std::filesystem::file_size(csv_path) > 0) {
    std::ifstream in(csv_path);
    std::string first;
    std::getline(in, first);
    if (first != res.header_line())
      throw config_error("refusing to append: '" + csv_path + "' has a different column schema");
    fresh = false;
  }
  {
    std::ofstream out(csv_path, append && !fresh ? std::ios::app : std::ios::trunc);
    if (!out) throw invalid_input("cannot write '" + csv_path + "'");
    out << res.csv(fresh);
  }
  std::ofstream js(sidecar_path(csv_path), std::ios::trunc);
  if (!js) throw invalid_input("cannot write '" + sidecar_path(csv_path) + "'");
  js << res.details.dump(2) << "\n";
}

}  // namespace sigpath

#endif
