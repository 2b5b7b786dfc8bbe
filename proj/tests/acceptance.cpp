// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sigpath/experiment.hpp"

using namespace sigpath;

namespace {

struct Verdict {
  bool pass;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// max over levels of |a_n - b_n| / max(1, |a_n|)
double level_rel_diff(const TruncatedTensor& a, const TruncatedTensor& b) {
  double worst = 0.0;
  for (std::size_t n = 0; n <= a.level(); ++n) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.block(n).size(); ++i) {
      const double d = a.block(n)[i] - b.block(n)[i];
      s += d * d;
    }
    worst = std::max(worst, std::sqrt(s) / std::max(1.0, level_norm(a, n)));
  }
  return worst;
}

PiecewiseLinearPath sub_path(const PiecewiseLinearPath& x, std::size_t from, std::size_t to) {
  std::vector<double> t;
  std::vector<std::vector<double>> pts;
  for (std::size_t k = from; k <= to; ++k) {
    t.push_back(k == from ? 0.0 : x.time(k) - x.time(from));
    auto p = x.point(k);
    pts.emplace_back(p.begin(), p.end());
  }
  return PiecewiseLinearPath::from_points(t, pts);
}

std::vector<double> column(const ExperimentResult& r, const std::string& name) {
  const auto c = static_cast<std::size_t>(std::find(r.header.begin(), r.header.end(), name) - r.header.begin());
  std::vector<double> out;
  for (const auto& row : r.rows) out.push_back(std::stod(row.at(c)));
  return out;
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return !v.empty();
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + fmt(v[i]);
  return s;
}

Verdict algebraic_identities() {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> lam(-2.0, 2.0);
  double chen = 0, shuf = 0, explog = 0, inverse = 0, scaling = 0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t d = 1 + i % 3, level = 2 + i % 4;
    const auto x = oracle::random_path(rng, d, 6);
    const auto s = signature(x, level);

    const std::size_t split = 1 + static_cast<std::size_t>(i) % 4;
    chen = std::max(chen, level_rel_diff(s, mul(signature(sub_path(x, 0, split), level),
                                               signature(sub_path(x, split, x.size() - 1), level))));

    const auto s4 = signature(x, 4);
    for (const auto& a : all_words(d, 4))
      for (const auto& b : all_words(d, 4 - a.size())) {
        const auto c = apply_shuffle_check(s4, a, b);
        shuf = std::max(shuf, std::abs(c.lhs - c.rhs) / std::max(1.0, std::abs(c.lhs)));
      }

    explog = std::max(explog, level_rel_diff(s, exp(log(s))));
    inverse = std::max(inverse, reverse_check(x, level));

    const double l = lam(rng);
    const auto sl = signature(scaled(x, l), level);
    for (std::size_t n = 0; n <= level; ++n)
      for (std::size_t k = 0; k < s.block(n).size(); ++k) {
        const double want = std::pow(l, double(n)) * s.block(n)[k];
        scaling = std::max(scaling, std::abs(sl.block(n)[k] - want) / std::max(1.0, std::abs(want)));
      }
  }
  const bool ok = chen <= 1e-12 && shuf <= 1e-10 && explog <= 1e-12 && inverse <= 1e-10 && scaling <= 1e-13;
  return {ok, "chen " + fmt(chen) + " <= 1e-12, shuffle " + fmt(shuf) + " <= 1e-10, exp/log " + fmt(explog) +
                  " <= 1e-12, inverse " + fmt(inverse) + " <= 1e-10, scaling " + fmt(scaling) + " <= 1e-13"};
}

Verdict time_coordinate() {
  std::mt19937_64 rng(102);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto x = time_extend(oracle::random_path(rng, 1 + i % 3, 8, 0.5 + 0.25 * (i % 7)));
    const auto stream = signature_stream(x, 5);
    for (std::size_t k = 0; k < x.size(); ++k) {
      Word w;
      double fact = 1.0;
      for (std::size_t len = 0; len <= 5; ++len, w = w.append(0), fact *= static_cast<double>(len)) {
        const double want = std::pow(x.time(k), double(len)) / fact;
        worst = std::max(worst, std::abs(coefficient(stream.tensors[k], w) - want));
      }
    }
  }
  return {worst <= 1e-12, "max |<e_0^k, S_t> - t^k/k!| = " + fmt(worst) + " <= 1e-12"};
}

Verdict brute_force() {
  std::mt19937_64 rng(103);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const auto x = oracle::random_path(rng, 2, 3);
    const auto ref = oracle::riemann_signature(x, 3, 1000);
    const auto s = signature(x, 3);
    for (std::size_t k = 0; k < ref.size(); ++k) worst = std::max(worst, std::abs(s.data()[k] - ref[k]));
  }
  return {worst <= 1e-3, "max deviation from nested Riemann sums " + fmt(worst) + " <= 1e-3"};
}

Verdict exact_representability() {
  std::string detail;
  bool ok = true;
  for (const char* t : {"integral", "terminal-square"}) {
    const auto c = parse_config(std::string(R"({"kind":"functional","seed":1,"samples":2000,"depths":[8],"levels":[2,3,4],"target":")") + t + "\"}");
    const auto e = column(run_functional(c), "test_error");
    for (double v : e) ok = ok && v <= 1e-6;
    detail += std::string(detail.empty() ? "" : "; ") + t + " N=2..4 test L2 " + join(e);
  }
  return {ok, detail + " (<= 1e-6)"};
}

Verdict expressiveness() {
  const std::vector<std::pair<std::string, std::string>> runs{
      {"running-max", R"({"kind":"functional","target":"running-max"})"},
      {"exp-terminal", R"({"kind":"functional","target":"exp-terminal"})"},
      {"linear ODE", R"({"kind":"ode","field":"linear","a":0,"b":0.5})"},
      {"GBM SDE", R"({"kind":"sde","a":0,"b":1,"y0":[1]})"}};
  bool ok = true;
  std::string detail;
  for (const auto& [name, base] : runs) {
    auto j = nlohmann::json::parse(base);
    j["seed"] = 1;
    j["samples"] = 2000;
    j["depths"] = {8};
    j["levels"] = {1, 2, 3, 4};
    const auto e = column(run_experiment(parse_config(j)), "test_error");
    ok = ok && strictly_decreasing(e) && e.size() == 4;
    detail += (detail.empty() ? "" : "; ") + name + " " + join(e);
  }
  return {ok, detail + " (strictly decreasing in N)"};
}

Verdict levy_convergence() {
  const auto c = parse_config(std::string(
      R"({"kind":"levy","functional":"levy-area","d":2,"seed":1,"samples":10000,"depths":[4,5,6,7,8,9,10],"reference_depth":14})"));
  const auto r = run_levy(c);
  const auto e = column(r, "error");
  const double slope = r.details["slope"].is_number() ? r.details["slope"].get<double>() : NAN;
  const bool ok = strictly_decreasing(e) && slope >= -0.65 && slope <= -0.35;
  return {ok, "L2 distances " + join(e) + ", log2 slope " + fmt(slope) + " in [-0.65, -0.35]"};
}

Verdict moment_stability() {
  const auto c = parse_config(std::string(
      R"({"kind":"moments","alpha":0.4,"p":2,"betas":[0.01],"gamma":2,"seed":1,"samples":10000,"depths":[8]})"));
  const auto r = run_moments(c);
  const double est = column(r, "estimate")[0], ratio = column(r, "half_ratio")[0];
  const bool ok = std::isfinite(est) && ratio >= 0.8 && ratio <= 1.25;
  return {ok, "estimate " + fmt(est) + " +- " + fmt(column(r, "std_error")[0]) + ", half/full " + fmt(ratio) +
                  " in [0.8, 1.25]"};
}

Verdict determinism() {
  const std::vector<std::string> configs{
      R"({"kind":"functional","target":"running-max","samples":300,"seed":4})",
      R"({"kind":"ode","field":"tanh-bounded","a":1,"b":1,"samples":100,"seed":4})",
      R"({"kind":"sde","a":0.1,"b":0.8,"depths":[4,6],"samples":100,"reference_depth":10,"seed":4})",
      R"({"kind":"levy","samples":100,"depths":[4,6],"reference_depth":9,"seed":4})",
      R"({"kind":"moments","betas":[0.01,0.02],"samples":200,"seed":4})"};
  const auto dir = std::filesystem::temp_directory_path() / "sigpath_acceptance";
  std::filesystem::create_directories(dir);
  auto slurp = [](const std::filesystem::path& f) {
    std::ifstream in(f, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  };
  std::size_t same = 0;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const auto c = parse_config(configs[i]);
    std::string csv[2], json[2];
    for (int rep = 0; rep < 2; ++rep) {
      const auto out = (dir / ("run" + std::to_string(i) + "_" + std::to_string(rep) + ".csv")).string();
      write_result(run_experiment(c), out);
      csv[rep] = slurp(out);
      json[rep] = slurp(sidecar_path(out));
    }
    if (csv[0] == csv[1] && json[0] == json[1] && !csv[0].empty()) ++same;
  }
  return {same == configs.size(),
          std::to_string(same) + "/" + std::to_string(configs.size()) + " configs byte-identical across reruns"};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "algebraic identity suite", 30, algebraic_identities},
      {2, "time-coordinate identity", 5, time_coordinate},
      {3, "brute-force oracle equivalence", 60, brute_force},
      {4, "exact-representability regressions", 120, exact_representability},
      {5, "expressiveness monotonicity", 600, expressiveness},
      {6, "interpolated-signature convergence", 600, levy_convergence},
      {7, "exponential-moment stability", 300, moment_stability},
      {8, "determinism", 600, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.budget_s;
    const bool pass = v.pass && in_time;
    failed += !pass;
    std::printf("criterion %d %s: %s | %s | %.1f s (budget %.0f s%s)\n", c.id, pass ? "PASS" : "FAIL", c.name,
                v.detail.c_str(), secs, c.budget_s, in_time ? "" : ", exceeded");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed ? 1 : 0;
}
