// Command-line front end: zorsn {solve,bench,verify-theory,attack-demo} <cfg>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "zorsn/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Zeroth-order randomized subspace Newton toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand

  zorsn::CliOverrides overrides;
  std::uint64_t seed = 0;
  std::string out_dir;
  int jobs = 1;
  auto* seed_opt = app.add_option("--seed", seed, "Override the solver and problem seed");
  auto* out_opt = app.add_option("--out-dir", out_dir, "Directory for traces, tables and reports");
  auto* jobs_opt = app.add_option("--jobs", jobs, "Worker threads for independent runs")->check(CLI::PositiveNumber);

  std::string config;
  auto add = [&](const char* name, const char* help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("config", config, "Experiment config file")->required();
    return sub;
  };
  auto* solve = add("solve", "Run one solver on one problem; exit 0 converged, 2 budget, 3 iteration cap");
  auto* bench = add("bench", "Run every listed solver over a seeded suite and tabulate");
  auto* verify = add("verify-theory", "Check the analytic bounds and constants");
  auto* attack = add("attack-demo", "Compare the SQP solver against the Gaussian baseline on toy attacks");

  CLI11_PARSE(app, argc, argv);

  if (*seed_opt) overrides.seed = seed;
  if (*out_opt) overrides.out_dir = out_dir;
  if (*jobs_opt) overrides.jobs = jobs;

  if (solve->parsed()) return zorsn::cmd_solve(config, overrides, std::cout, std::cerr);
  if (bench->parsed()) return zorsn::cmd_bench(config, overrides, std::cout, std::cerr);
  if (verify->parsed()) return zorsn::cmd_verify_theory(config, overrides, std::cout, std::cerr);
  if (attack->parsed()) return zorsn::cmd_attack_demo(config, overrides, std::cout, std::cerr);
  return 1;
}
