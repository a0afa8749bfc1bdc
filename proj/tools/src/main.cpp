#include <cstdio>
#include <exception>

#include "CLI11.hpp"
#include "pinnbench/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"PINN training benchmark harness"};
  app.require_subcommand(1);

  std::string config_path, out_dir, spec_path, problem, out_path, run_dir;
  std::vector<std::uint64_t> seeds;
  int jobs = 0;
  std::uint64_t gen_seed = 99;
  int rows = 0;

  CLI::App* run = app.add_subcommand("run", "Execute all seeds of one experiment config");
  run->add_option("--config", config_path, "Experiment config JSON")->required();
  run->add_option("--seed", seeds, "Override the config's seed list");
  run->add_option("--out", out_dir, "Override the output directory");
  run->add_option("--jobs", jobs, "Parallel runs (default: PINNBENCH_JOBS or 1)");

  CLI::App* sweep = app.add_subcommand("sweep", "Run a parameter sweep spec");
  sweep->add_option("--spec", spec_path, "Sweep spec JSON")->required();

  CLI::App* gendata = app.add_subcommand("gendata", "Generate datasets and reference tables");
  gendata->add_option("--problem", problem, "Problem name")->required();
  gendata->add_option("--out", out_path, "Output file path")->required();
  gendata->add_option("--seed", gen_seed, "Generation seed");
  gendata->add_option("--rows", rows, "Observation rows (inverse problems)");

  CLI::App* snapshots = app.add_subcommand("snapshots", "Re-derive per-event point clouds");
  snapshots->add_option("--run", run_dir, "Directory of a completed run")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return pinn::bench::cmd_run(config_path, seeds, out_dir, jobs);
    if (sweep->parsed()) return pinn::bench::cmd_sweep(spec_path);
    if (gendata->parsed()) return pinn::bench::cmd_gendata(problem, out_path, gen_seed, rows);
    if (snapshots->parsed()) return pinn::bench::cmd_snapshots(run_dir);
  } catch (const pinn::ConfigError& err) {
    std::fprintf(stderr, "configuration error: %s\n", err.what());
    return 2;
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 1;
  }
  return 2;
}
