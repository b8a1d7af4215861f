#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "liouville/runner.hpp"

using namespace liouville;

int main(int argc, char** argv) {
  CLI::App app{"liouville: prescribed-curvature mean-field solver and diagnostics"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  uint64_t seed = 12345;
  int threads = 1;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "scenario config file")->required();
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--seed", seed, "random seed for eigensolver starts");
    cmd->add_option("--threads", threads, "sweep parallelism");
  };

  CLI::App* info = app.add_subcommand("info", "classification, chi, tau, Gamma table");
  CLI::App* solve = app.add_subcommand("solve", "minimize at a single lambda");
  CLI::App* sweep = app.add_subcommand("sweep", "lambda continuation sweep");
  CLI::App* bubbles = app.add_subcommand("bubbles", "bubble slope study");
  CLI::App* limit = app.add_subcommand("limit", "plane/half-plane limit checks");
  CLI::App* probe = app.add_subcommand("probe", "Trudinger-Moser ratio probes");
  for (CLI::App* cmd : {info, solve, sweep, bubbles, limit, probe}) add_common(cmd);

  CLI11_PARSE(app, argc, argv);

  if (const char* env = std::getenv("LIOUVILLE_THREADS")) {
    threads = std::max(1, std::atoi(env));
  }

  try {
    ScenarioConfig cfg = parse_config(config_path);
    if (info->parsed()) return run_info(cfg, out_dir, std::cout);
    if (solve->parsed()) return run_solve(cfg, out_dir, std::cout, seed);
    if (sweep->parsed()) return run_sweep(cfg, out_dir, std::cout, seed, threads);
    if (bubbles->parsed()) return run_bubbles(cfg, out_dir, std::cout);
    if (limit->parsed()) return run_limit(cfg, out_dir, std::cout);
    if (probe->parsed()) return run_probe(cfg, out_dir, std::cout);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 3;
  } catch (const PreconditionError& e) {
    std::cerr << "precondition violated: " << e.what() << "\n";
    return 4;
  }
  return 1;
}
