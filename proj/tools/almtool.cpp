#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "alm/pipeline.hpp"

int main(int argc, char** argv) {
#ifdef _OPENMP
  omp_set_num_threads(alm::pipe::thread_count());
#endif

  CLI::App app{"Scenario-tree ALM: generation, decomposition solve, "
               "verification and reporting"};
  app.require_subcommand(1);

  std::string config_path, tree_path, solution_path, out_dir = ".";
  std::string format = "csv", param;
  std::vector<double> values;
  std::uint64_t seed = 0;
  bool seed_set = false, oracle = false;

  auto* gen = app.add_subcommand("generate", "simulate a scenario tree");
  gen->add_option("--config", config_path, "run config file")->required();
  gen->add_option("--out", out_dir, "output directory");
  gen->add_option("--seed", seed, "override the config seed")
      ->each([&](const std::string&) { seed_set = true; });

  auto* sol = app.add_subcommand("solve", "run the nested decomposition");
  sol->add_option("--tree", tree_path, "scenario tree file")->required();
  sol->add_option("--config", config_path, "run config file")->required();

  auto* ver = app.add_subcommand("verify", "dominance and oracle checks");
  ver->add_option("--tree", tree_path, "scenario tree file")->required();
  ver->add_option("--solution", solution_path, "solution file")->required();
  ver->add_flag("--oracle", oracle, "also compare against the extensive LP");

  auto* rep = app.add_subcommand("report", "emit result tables and CDFs");
  rep->add_option("--solution", solution_path, "solution file")->required();
  rep->add_option("--tree", tree_path,
                  "scenario tree file (default: tree.txt next to the solution)");
  rep->add_option("--format", format, "csv or json");

  auto* swp = app.add_subcommand("sweep", "re-run over a parameter range");
  swp->add_option("--config", config_path, "run config file")->required();
  swp->add_option("--param", param, "parameter to vary")->required();
  swp->add_option("--values", values, "comma separated values")
      ->required()
      ->delimiter(',');
  swp->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  if (gen->parsed())
    return alm::pipe::cmd_generate(
        config_path, out_dir,
        seed_set ? std::optional<std::uint64_t>(seed) : std::nullopt,
        std::cout);
  if (sol->parsed())
    return alm::pipe::cmd_solve(tree_path, config_path, std::cout);
  if (ver->parsed())
    return alm::pipe::cmd_verify(tree_path, solution_path, oracle, std::cout);
  if (rep->parsed()) {
    if (tree_path.empty()) {
      auto slash = solution_path.find_last_of('/');
      tree_path = (slash == std::string::npos
                       ? std::string()
                       : solution_path.substr(0, slash + 1)) +
                  "tree.txt";
    }
    return alm::pipe::cmd_report(solution_path, tree_path, format, std::cout);
  }
  return alm::pipe::cmd_sweep(config_path, param, values, out_dir, std::cout);
}
