// Command-line front end: run a scenario, list the catalog, or time the maximal paths.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "hajlasz/scenario.hpp"

namespace {

void apply_thread_env() {
#ifdef _OPENMP
  if (const char* v = std::getenv("HAJLASZ_THREADS")) {
    const int n = std::atoi(v);
    if (n > 0) omp_set_num_threads(n);
  }
#endif
}

int execute(const std::string& path, const std::string& out_dir, bool force_bench) {
  hajlasz::ScenarioConfig cfg;
  try {
    cfg = hajlasz::load_config(path);
  } catch (const hajlasz::config_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return static_cast<int>(hajlasz::ExitCode::config_error);
  }
  if (force_bench) cfg.scenario = "bench";
  if (!out_dir.empty()) cfg.output.dir = out_dir;
  const auto result = hajlasz::run_scenario(cfg);
  try {
    for (const auto& f : hajlasz::write_outputs(cfg, result)) std::cout << "wrote " << f << '\n';
  } catch (const std::exception& e) {
    std::cerr << "output error: " << e.what() << '\n';
    return static_cast<int>(hajlasz::ExitCode::verification_failure);
  }
  if (!result.bench_csv.empty()) std::cout << result.bench_csv;
  std::cout << cfg.scenario << ": " << (result.status == hajlasz::ExitCode::pass ? "pass" : "FAIL") << '\n';
  return static_cast<int>(result.status);
}

}  // namespace

int main(int argc, char** argv) {
  apply_thread_env();
  CLI::App app{"Numerical experiments with maximal functions, grand norms and pointwise Sobolev inequalities"};
  app.require_subcommand(1);

  std::string run_path, run_out;
  auto* run = app.add_subcommand("run", "run the scenario described by a JSON config");
  run->add_option("config", run_path, "scenario config file")->required();
  run->add_option("--out", run_out, "output directory (overrides output.dir)");

  bool as_json = false;
  auto* catalog = app.add_subcommand("catalog", "list test functions and weight families");
  catalog->add_flag("--json", as_json, "print a JSON array");

  std::string bench_path, bench_out;
  auto* bench = app.add_subcommand("bench", "time direct vs fast maximal-function paths");
  bench->add_option("config", bench_path, "config supplying maximal/bench settings")->required();
  bench->add_option("--out", bench_out, "output directory (overrides output.dir)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(hajlasz::ExitCode::config_error);
  }

  if (*catalog) {
    std::cout << hajlasz::list_catalog(as_json);
    return 0;
  }
  if (*run) return execute(run_path, run_out, false);
  return execute(bench_path, bench_out, true);
}
