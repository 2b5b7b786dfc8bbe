#ifndef SIGPATH_TOOLS_CLI_HPP
#define SIGPATH_TOOLS_CLI_HPP

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sigpath/experiment.hpp"

namespace sigpath::cli {

enum exit_code : int { ok = 0, usage = 2, config = 2, numerical = 3, internal = 1 };

inline std::string slurp(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw config_error("cannot open config '" + file + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline int run_command(const std::string& config_file, std::string out_path, std::optional<std::uint64_t> seed,
                       bool append, std::ostream& err) {
  ExperimentConfig cfg = parse_config(slurp(config_file), seed);
  if (cfg.kind == "sig" && std::filesystem::path(cfg.input).is_relative() &&
      !std::filesystem::exists(cfg.input))
    cfg.input = (std::filesystem::path(config_file).parent_path() / cfg.input).string();
  if (out_path.empty()) out_path = cfg.output;
  if (out_path.empty()) throw config_error("no output path: pass --out or set 'output' in the config");
  const auto start = std::chrono::steady_clock::now();
  const auto res = run_experiment(cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_result(res, out_path, append);
  err << "sigpath: " << cfg.kind << " [" << cfg.hash_hex() << "] " << res.rows.size() << " rows -> " << out_path
      << " (" << secs << " s)\n";
  return ok;
}

// Entry point shared by the executable and the tests.
inline int sigpath_main(int argc, const char* const* argv, std::ostream& out = std::cout,
                        std::ostream& err = std::cerr) {
  CLI::App app{"Path signatures, signature regression and Brownian experiments."};
  app.require_subcommand(1);

  std::string input;
  std::size_t level = 2;
  auto* sig = app.add_subcommand("sig", "Print the signature of the time-extended path in a CSV file");
  sig->add_option("--input", input, "CSV with header t,x1,...,xd")->required();
  sig->add_option("--level", level, "Truncation level N")->check(CLI::PositiveNumber);

  std::string config_file, out_path;
  std::optional<std::uint64_t> seed;
  bool append = false;
  auto* run = app.add_subcommand("run", "Run an experiment described by a JSON config");
  run->add_option("--config", config_file, "Experiment config (JSON)")->required();
  run->add_option("--out", out_path, "Result CSV; a .json sidecar is written next to it");
  run->add_option("--seed", seed, "Override the config seed");
  run->add_flag("--append", append, "Append rows to an existing CSV with the same columns");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : usage;
  }

  try {
    if (*sig) {
      out << signature_json(load_path_csv(input), level).dump() << "\n";
      return ok;
    }
    return run_command(config_file, out_path, seed, append, err);
  } catch (const parse_error& e) {
    err << "sigpath: parse error at " << e.what() << "\n";
    return config;
  } catch (const config_error& e) {
    err << "sigpath: config error: " << e.what() << "\n";
    return config;
  } catch (const invalid_input& e) {
    err << "sigpath: invalid input: " << e.what() << "\n";
    return config;
  } catch (const numerical_error& e) {
    err << "sigpath: numerical failure: " << e.what() << "\n";
    return numerical;
  } catch (const std::exception& e) {
    err << "sigpath: " << e.what() << "\n";
    return internal;
  }
}

}  // namespace sigpath::cli

#endif
