#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pinn/evaluation.hpp"
#include "pinn/trainer.hpp"

namespace pinn::bench {

/// Fully-resolved experiment description: problem, network, point counts,
/// schedule, sampler, weights, seeds, and output options. Parsed from strict
/// JSON; omitted fields pick up the problem registry's defaults.
struct ExperimentConfig {
  std::string problem;
  std::vector<int> hidden;  // network hidden widths
  PointCounts counts;
  TrainSchedule schedule;
  SamplerChoice sampler;
  LossWeights weights;
  std::vector<std::uint64_t> seeds;
  std::string output_dir = "out";
  std::string data_file;      // observations CSV (inverse problems)
  std::uint64_t data_seed = 0;  // seed for generated observations
  int snapshot_every_events = 0;
  int retry_budget = 10;
  int log_every = 100;
  int jobs = 0;  // 0: PINNBENCH_JOBS or 1

  MLPConfig net_config(const PDEProblem& prob) const;
  void validate() const;
};

/// Strict parse: unknown keys anywhere are rejected; defaults come from the
/// problem registry.
ExperimentConfig parse_config_json(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

/// Canonical JSON echo with every default materialized.
std::string config_echo_json(const ExperimentConfig& config);

struct SweepSpec {
  std::string base_json;  // resolved base config as JSON text
  std::string parameter;  // dotted path into the config schema
  std::vector<std::string> values;  // JSON-encoded values
};

SweepSpec load_sweep(const std::string& path);
/// Base config with the swept parameter set to values[index].
ExperimentConfig sweep_cell(const SweepSpec& spec, std::size_t index);

struct ExperimentOutcome {
  std::vector<RunRecord> records;
  int exit_code = 0;  // 0 ok, 1 every run diverged/filtered after retries
};

/// Runs all seeds (optionally in parallel), applies the divergent-run filter
/// with replacement seeds, and writes results/logs/checkpoints under
/// config.output_dir.
ExperimentOutcome run_experiment(const ExperimentConfig& config);

struct SweepAggregateRow {
  std::string parameter;
  std::string value;  // JSON-encoded swept value
  int runs_ok = 0;
  double l2_mean = 0.0;
  double l2_sd = 0.0;
};

std::vector<SweepAggregateRow> read_sweep_aggregate_csv(const std::string& path);

int cmd_run(const std::string& config_path, const std::vector<std::uint64_t>& seed_override,
            const std::string& out_override, int jobs_override);
int cmd_sweep(const std::string& spec_path);
int cmd_gendata(const std::string& problem, const std::string& out_path, std::uint64_t seed,
                int rows);
int cmd_snapshots(const std::string& run_dir);

}  // namespace pinn::bench
