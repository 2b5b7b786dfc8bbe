#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sigpath/experiment.hpp"

using namespace sigpath;

namespace {

ExperimentConfig cfg(const std::string& text) { return parse_config(text); }

std::vector<double> column(const ExperimentResult& r, const std::string& name) {
  const auto it = std::find(r.header.begin(), r.header.end(), name);
  REQUIRE(it != r.header.end());
  const auto c = static_cast<std::size_t>(it - r.header.begin());
  std::vector<double> out;
  for (const auto& row : r.rows) out.push_back(std::stod(row[c]));
  return out;
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "sigpath_test_experiment";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("config validation", "[experiment]") {
  REQUIRE_THROWS_AS(cfg("not json"), config_error);
  REQUIRE_THROWS_AS(cfg(R"({"seed": 1})"), config_error);
  REQUIRE_THROWS_AS(cfg(R"({"kind": "banana"})"), config_error);
  REQUIRE_THROWS_AS(cfg(R"({"kind": "functional", "target": "cube"})"), config_error);
  REQUIRE_THROWS_AS(cfg(R"({"kind": "functional", "target": "integral", "depths": [25]})"), config_error);
  REQUIRE_THROWS_AS(cfg(R"({"kind": "functional", "target": "integral", "levels": [0]})"), config_error);
  REQUIRE_THROWS_AS(cfg(R"({"kind": "functional", "target": "integral", "samples": 9})"), config_error);
  REQUIRE_THROWS_AS(cfg(R"({"kind": "functional", "target": "integral", "p": 0.5})"), config_error);
  REQUIRE_THROWS_AS(cfg(R"({"kind": "moments", "alpha": 0.5})"), config_error);
  REQUIRE_THROWS_AS(cfg(R"({"kind": "moments", "alpha": 0.3})"), config_error);
  REQUIRE_THROWS_AS(cfg(R"({"kind": "functional", "target": "integral", "smaples": 100})"), config_error);
  REQUIRE_THROWS_AS(cfg(R"({"kind": "functional", "target": "integral", "samples": "many"})"), config_error);
  REQUIRE_THROWS_AS(cfg(R"({"kind": "ode", "field": "cubic"})"), config_error);
  REQUIRE_THROWS_AS(cfg(R"({"kind": "sde", "depths": [11]})"), config_error);
  REQUIRE_THROWS_AS(cfg(R"({"kind": "levy", "d": 3})"), config_error);
  REQUIRE_THROWS_AS(cfg(R"({"kind": "functional", "target": "integral", "lambda": "auto"})"), config_error);
  REQUIRE_NOTHROW(cfg(R"({"kind": "sde", "depths": [10]})"));

  auto c = cfg(R"({"kind": "functional", "target": "integral"})");
  REQUIRE(c.samples == 2000);
  REQUIRE(c.depths == std::vector<std::size_t>{8});
  REQUIRE(c.levels == std::vector<std::size_t>{1, 2, 3, 4});
  REQUIRE(cfg(R"({"kind": "levy"})").samples == 10000);
  REQUIRE(cfg(R"({"kind": "levy"})").reference_depth == 14);
  REQUIRE(cfg(R"({"kind": "moments", "beta": 0.02})").betas == std::vector<double>{0.02});
}

TEST_CASE("config hash identifies resolved inputs", "[experiment]") {
  auto a = cfg(R"({"kind": "functional", "target": "integral", "seed": 3})");
  auto b = cfg(R"({"target": "integral", "seed": 3, "kind": "functional", "samples": 2000, "output": "x.csv"})");
  REQUIRE(a.hash() == b.hash());
  REQUIRE(a.hash_hex().size() == 16);
  auto c = parse_config(std::string(R"({"kind": "functional", "target": "integral", "seed": 3})"), 4);
  REQUIRE(c.seed == 4);
  REQUIRE(c.hash() != a.hash());
  REQUIRE(cfg(R"({"kind": "functional", "target": "integral", "seed": 3, "lambda": 0})").hash() != a.hash());
}

TEST_CASE("functional targets", "[experiment]") {
  for (const char* t : {"integral", "terminal-square"}) {
    auto r = run_functional(cfg(std::string(R"({"kind": "functional", "levels": [2, 3], "seed": 5, "target": ")") + t + "\"}"));
    REQUIRE(r.rows.size() == 2);
    for (double e : column(r, "test_error")) REQUIRE(e <= 1e-6);
  }
  auto rm = run_functional(cfg(R"({"kind": "functional", "target": "running-max", "levels": [1, 2, 3], "seed": 5})"));
  REQUIRE(strictly_decreasing(column(rm, "test_error")));
  auto ex = run_functional(cfg(R"({"kind": "functional", "target": "exp-terminal", "seed": 5})"));
  REQUIRE(strictly_decreasing(column(ex, "test_error")));
  REQUIRE(strictly_decreasing(column(ex, "train_error")));
}

TEST_CASE("random ODE targets", "[experiment]") {
  auto id = run_ode(cfg(R"({"kind": "ode", "field": "zero-drift-identity", "levels": [1, 2], "lambda": 0, "seed": 6})"));
  for (double e : column(id, "test_error")) REQUIRE(e <= 1e-8);
  auto lin = run_ode(cfg(R"({"kind": "ode", "field": "linear", "a": 0, "b": 0.5, "samples": 500, "seed": 6})"));
  REQUIRE(strictly_decreasing(column(lin, "test_error")));
  auto th = run_ode(cfg(R"({"kind": "ode", "field": "tanh-bounded", "a": 1, "b": 1, "samples": 500, "seed": 6})"));
  REQUIRE(strictly_decreasing(column(th, "test_error")));
  for (double x : column(th, "excluded")) REQUIRE(x == 0.0);
}

TEST_CASE("GBM targets", "[experiment]") {
  auto det = run_sde(cfg(R"({"kind": "sde", "a": 0.5, "b": 0, "depths": [8], "levels": [4], "samples": 500, "seed": 7})"));
  REQUIRE(column(det, "test_error")[0] <= 1e-6);
  auto sto = run_sde(cfg(R"({"kind": "sde", "a": 0, "b": 1, "depths": [4, 6, 8], "levels": [4], "samples": 500, "seed": 7})"));
  REQUIRE(strictly_decreasing(column(sto, "test_error")));
  auto byn = run_sde(cfg(R"({"kind": "sde", "a": 0, "b": 1, "depths": [8], "samples": 500, "seed": 7})"));
  REQUIRE(strictly_decreasing(column(byn, "test_error")));
}

TEST_CASE("interpolated-signature convergence", "[experiment]") {
  auto time = run_levy(cfg(R"({"kind": "levy", "functional": "time", "samples": 20, "reference_depth": 12})"));
  for (double e : column(time, "error")) REQUIRE(e <= 1e-12);
  REQUIRE(time.details["slope"].is_null());

  auto coord = run_levy(cfg(R"({"kind": "levy", "functional": "coordinate", "samples": 400, "reference_depth": 13, "seed": 8})"));
  REQUIRE(strictly_decreasing(column(coord, "error")));
  const double s1 = coord.details["slope"].get<double>();
  REQUIRE(s1 > -0.6);
  REQUIRE(s1 < -0.4);

  auto levy = run_levy(cfg(R"({"kind": "levy", "samples": 400, "reference_depth": 13, "seed": 8})"));
  REQUIRE(strictly_decreasing(column(levy, "error")));
  const double s2 = levy.details["slope"].get<double>();
  REQUIRE(s2 >= -0.65);
  REQUIRE(s2 <= -0.35);
}

TEST_CASE("exponential moments", "[experiment]") {
  auto r = run_moments(cfg(R"({"kind": "moments", "betas": [1e-6, 0.005, 0.01, 0.02], "samples": 1000, "seed": 9})"));
  const auto est = column(r, "estimate");
  REQUIRE(std::abs(est[0] - 1.0) <= 0.01);
  for (std::size_t i = 1; i < est.size(); ++i) REQUIRE(est[i] > est[i - 1]);
  for (double s : column(r, "stable")) REQUIRE(s == 1.0);
  REQUIRE_THROWS_AS(run_moments(cfg(R"({"kind": "moments", "betas": [100], "samples": 10})")), numerical_error);
}

TEST_CASE("result files are reproducible and schema-checked", "[experiment]") {
  const auto c = cfg(R"({"kind": "functional", "target": "running-max", "samples": 200, "seed": 10})");
  const auto out = scratch("rm.csv").string();
  auto read = [](const std::string& f) {
    std::ifstream in(f);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  };
  write_result(run_experiment(c), out);
  const auto first = read(out), first_json = read(sidecar_path(out));
  write_result(run_experiment(c), out);
  REQUIRE(read(out) == first);
  REQUIRE(read(sidecar_path(out)) == first_json);
  REQUIRE(first.find(c.hash_hex()) != std::string::npos);
  REQUIRE(first_json.find("\"fits\"") != std::string::npos);

  write_result(run_experiment(c), out, true);
  REQUIRE(read(out).size() > first.size());
  const auto m = cfg(R"({"kind": "moments", "samples": 10})");
  REQUIRE_THROWS_AS(write_result(run_experiment(m), out, true), config_error);
}

TEST_CASE("signature experiment", "[experiment]") {
  const auto csv = scratch("line.csv");
  {
    std::ofstream f(csv);
    f << "t,x1\n0,0\n1,1\n";
  }
  auto c = cfg(std::string(R"({"kind": "sig", "levels": [2], "input": ")") + csv.string() + "\"}");
  auto r = run_experiment(c);
  REQUIRE(r.rows.size() == 7);
  REQUIRE(r.rows[6][3] == "\"1,1\"");
  REQUIRE(r.rows[6][4] == "0.5");
}
