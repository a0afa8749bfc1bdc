#include <atomic>
#include <cstdio>
#include <iomanip>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "pinn/mlp.hpp"
#include "pinnbench/experiment.hpp"

namespace pinn::bench {

namespace fs = std::filesystem;

namespace {

int effective_jobs(int config_jobs, int override_jobs) {
  if (override_jobs > 0) return override_jobs;
  if (config_jobs > 0) return config_jobs;
  if (const char* env = std::getenv("PINNBENCH_JOBS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

std::string run_id_for(int index, std::uint64_t seed) {
  std::ostringstream os;
  os << 'r' << (index < 100 ? index < 10 ? "00" : "0" : "") << index << "_seed" << seed;
  return os.str();
}

struct RunContext {
  const ExperimentConfig& config;
  const PDEProblem& problem;
  const MLPConfig& net;
  const ObservationSet* observations;
  std::string cache_dir;
};

RunRecord execute_run(const RunContext& ctx, int index, std::uint64_t seed) {
  RunRecord record;
  record.run_id = run_id_for(index, seed);
  record.problem = ctx.config.problem;
  record.sampler = to_string(ctx.config.sampler.kind);
  if (ctx.config.sampler.kind == SamplerKind::pacmann) {
    record.point_optimizer = to_string(ctx.config.sampler.pacmann.optimizer);
    record.stepsize = ctx.config.sampler.pacmann.stepsize;
    record.num_steps = ctx.config.sampler.pacmann.num_steps;
  }
  record.period = ctx.config.schedule.resample_period;
  record.n_collocation = ctx.config.counts.n_r;
  record.seed = seed;

  const fs::path run_dir = fs::path(ctx.config.output_dir) / "runs" / record.run_id;
  fs::create_directories(run_dir);

  TrainOptions options;
  options.log_every = ctx.config.log_every;
  options.observations = ctx.observations;
  TrainLogCsv log((run_dir / "train_log.csv").string(), ctx.problem.inverse_names);
  options.log_sink = [&log](const TrainLogRow& row) { log.append(row); };
  if (ctx.config.snapshot_every_events > 0) {
    fs::create_directories(run_dir / "snapshots");
    options.snapshot_sink = [&ctx, run_dir, events = 0](long iteration,
                                                        const CollocationSet& set) mutable {
      const bool initial = iteration == 0;
      if (!initial && (++events % ctx.config.snapshot_every_events) != 0) return;
      std::ostringstream name;
      name << "points_" << std::setw(7) << std::setfill('0') << iteration << ".csv";
      write_point_cloud_csv((run_dir / "snapshots" / name.str()).string(), iteration, set);
    };
  }

  const auto t0 = std::chrono::steady_clock::now();
  TrainResult result = train(ctx.problem, ctx.net, ctx.config.schedule, ctx.config.sampler,
                             ctx.config.weights, seed, options);
  record.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  save_checkpoint((run_dir / "checkpoint.bin").string(), ctx.net, result.theta);
  record.final_loss = result.final_loss.total;
  if (result.diverged) {
    record.status = RunStatus::diverged;
    record.final_loss = std::numeric_limits<double>::quiet_NaN();
  } else {
    Evaluator evaluator(ctx.problem, ctx.net, ctx.cache_dir);
    record.errors = evaluator.evaluate(result.theta);
  }
  return record;
}

void run_batch(const RunContext& ctx, const std::vector<std::pair<int, std::uint64_t>>& specs,
               int jobs, std::vector<RunRecord>& out) {
  out.resize(specs.size());
  if (jobs <= 1 || specs.size() <= 1) {
    for (std::size_t i = 0; i < specs.size(); ++i)
      out[i] = execute_run(ctx, specs[i].first, specs[i].second);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= specs.size()) return;
      out[i] = execute_run(ctx, specs[i].first, specs[i].second);
    }
  };
  std::vector<std::thread> pool;
  const int n_threads = std::min<int>(jobs, static_cast<int>(specs.size()));
  pool.reserve(n_threads);
  for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

}  // namespace

ExperimentOutcome run_experiment(const ExperimentConfig& config) {
  config.validate();
  PDEProblem problem = make_problem(config.problem);
  problem.counts = config.counts;
  const MLPConfig net = config.net_config(problem);

  fs::create_directories(fs::path(config.output_dir) / "runs");
  {
    std::ofstream echo(fs::path(config.output_dir) / "config_echo.json");
    echo << config_echo_json(config);
  }
  const std::string cache_dir = (fs::path(config.output_dir) / "cache").string();
  fs::create_directories(cache_dir);

  std::optional<ObservationSet> observations;
  if (problem.counts.n_ref > 0) {
    observations = config.data_file.empty()
                       ? gen_taylor_green(problem.params.lambda2, problem.counts.n_ref,
                                          config.data_seed)
                       : load_observations_csv(config.data_file);
  }

  RunContext ctx{config, problem, net, observations ? &*observations : nullptr, cache_dir};
  const int jobs = effective_jobs(config.jobs, 0);

  ExperimentOutcome outcome;
  std::vector<std::pair<int, std::uint64_t>> pending;
  for (std::size_t i = 0; i < config.seeds.size(); ++i)
    pending.emplace_back(static_cast<int>(i), config.seeds[i]);
  std::uint64_t next_seed = 0;
  for (std::uint64_t s : config.seeds) next_seed = std::max(next_seed, s);
  ++next_seed;
  int used_retries = 0;

  while (!pending.empty()) {
    std::vector<RunRecord> fresh;
    run_batch(ctx, pending, jobs, fresh);
    for (auto& r : fresh) outcome.records.push_back(std::move(r));
    pending.clear();

    // the filter is recomputed over the whole cohort after every batch
    for (RunRecord& r : outcome.records)
      if (r.status == RunStatus::filtered) r.status = RunStatus::ok;
    filter_divergent(outcome.records);

    int ok_count = 0;
    for (const RunRecord& r : outcome.records)
      if (r.status == RunStatus::ok) ++ok_count;
    int need = static_cast<int>(config.seeds.size()) - ok_count;
    while (need > 0 && used_retries < config.retry_budget) {
      pending.emplace_back(static_cast<int>(outcome.records.size() + pending.size()), next_seed++);
      ++used_retries;
      --need;
    }
  }

  write_results_csv((fs::path(config.output_dir) / "results.csv").string(), outcome.records);
  bool any_ok = false;
  for (const RunRecord& r : outcome.records) any_ok = any_ok || r.status == RunStatus::ok;
  outcome.exit_code = any_ok ? 0 : 1;
  return outcome;
}

std::vector<SweepAggregateRow> read_sweep_aggregate_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("read_sweep_aggregate_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != "parameter,value,runs_ok,l2_mean,l2_sd")
    throw ConfigError("read_sweep_aggregate_csv: bad header in " + path);
  std::vector<SweepAggregateRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    SweepAggregateRow row;
    std::string cell;
    std::getline(ls, row.parameter, ',');
    std::getline(ls, row.value, ',');
    std::getline(ls, cell, ',');
    row.runs_ok = std::stoi(cell);
    std::getline(ls, cell, ',');
    row.l2_mean = cell.empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(cell);
    std::getline(ls, cell, ',');
    row.l2_sd = cell.empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(cell);
    rows.push_back(std::move(row));
  }
  return rows;
}

int cmd_run(const std::string& config_path, const std::vector<std::uint64_t>& seed_override,
            const std::string& out_override, int jobs_override) {
  ExperimentConfig config = load_config(config_path);
  if (!seed_override.empty()) config.seeds = seed_override;
  if (!out_override.empty()) config.output_dir = out_override;
  if (jobs_override > 0) config.jobs = jobs_override;
  return run_experiment(config).exit_code;
}

int cmd_sweep(const std::string& spec_path) {
  const SweepSpec spec = load_sweep(spec_path);
  const ExperimentConfig base = parse_config_json(spec.base_json);
  fs::create_directories(base.output_dir);

  std::vector<RunRecord> all;
  std::ofstream aggregate(fs::path(base.output_dir) / "sweep_aggregate.csv");
  aggregate << "parameter,value,runs_ok,l2_mean,l2_sd\n";
  int exit_code = 0;
  for (std::size_t i = 0; i < spec.values.size(); ++i) {
    const ExperimentConfig cell = sweep_cell(spec, i);
    ExperimentOutcome outcome = run_experiment(cell);
    exit_code = std::max(exit_code, outcome.exit_code);
    for (RunRecord& r : outcome.records) {
      r.run_id = "v" + std::to_string(i) + "_" + r.run_id;
      all.push_back(std::move(r));
    }
    aggregate << spec.parameter << ',' << spec.values[i] << ',';
    try {
      const AggregateStats stats = pinn::aggregate(outcome.records);
      char mean[32], sd[32];
      std::snprintf(mean, sizeof mean, "%.17g", stats.mean);
      std::snprintf(sd, sizeof sd, "%.17g", stats.sd);
      aggregate << stats.count << ',' << mean << ',' << sd << '\n';
    } catch (const ConfigError&) {
      aggregate << "0,,\n";
    }
  }
  write_results_csv((fs::path(base.output_dir) / "sweep_results.csv").string(), all);
  return exit_code;
}

int cmd_gendata(const std::string& problem_name, const std::string& out_path, std::uint64_t seed,
                int rows) {
  const PDEProblem problem = make_problem(problem_name);
  if (problem_name == "navier_stokes") {
    const int n = rows > 0 ? rows : problem.counts.n_ref;
    save_observations_csv(out_path, gen_taylor_green(problem.params.lambda2, n, seed));
  } else {
    save_reference_table(out_path, problem);
  }
  return 0;
}

int cmd_snapshots(const std::string& run_dir) {
  std::ifstream in(fs::path(run_dir) / "config_echo.json");
  if (!in) throw ConfigError("snapshots: no config_echo.json under " + run_dir);
  std::stringstream buffer;
  buffer << in.rdbuf();
  ExperimentConfig config = parse_config_json(buffer.str());

  // deterministic re-run of the first seed with a snapshot at every event
  PDEProblem problem = make_problem(config.problem);
  problem.counts = config.counts;
  const MLPConfig net = config.net_config(problem);
  std::optional<ObservationSet> observations;
  if (problem.counts.n_ref > 0) {
    observations = config.data_file.empty()
                       ? gen_taylor_green(problem.params.lambda2, problem.counts.n_ref,
                                          config.data_seed)
                       : load_observations_csv(config.data_file);
  }
  const fs::path snap_dir = fs::path(run_dir) / "snapshots";
  fs::create_directories(snap_dir);

  TrainOptions options;
  options.evaluate_l2 = false;
  options.observations = observations ? &*observations : nullptr;
  int count = 0;
  options.snapshot_sink = [&](long iteration, const CollocationSet& set) {
    std::ostringstream name;
    name << "points_" << std::setw(7) << std::setfill('0') << iteration << ".csv";
    write_point_cloud_csv((snap_dir / name.str()).string(), iteration, set);
    ++count;
  };
  train(problem, net, config.schedule, config.sampler, config.weights, config.seeds.front(),
        options);
  std::printf("wrote %d snapshots to %s\n", count, snap_dir.string().c_str());
  return 0;
}

}  // namespace pinn::bench
