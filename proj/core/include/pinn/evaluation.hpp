#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "pinn/pde.hpp"

namespace pinn {

/// Test-error summary for one trained network.
struct ErrorReport {
  double l2 = std::numeric_limits<double>::quiet_NaN();
  /// Per-output errors when the problem has several outputs (u, v, p).
  std::vector<double> per_output_l2;
  /// |estimate - truth| / |truth| for each inverse scalar.
  std::vector<double> inverse_rel_err;
};

/// ||u_true - u_pred||_2 / ||u_true||_2. Throws std::domain_error when
/// the true norm vanishes.
double l2_relative_error(std::span<const double> u_true, std::span<const double> u_pred);

/// Fixed evaluation point set: a near-balanced tensor grid of about 10,000
/// points up to three dimensions; 10,000 Hammersley points beyond that,
/// where no equispaced grid of that size exists.
std::vector<Point> eval_grid(const PDEProblem& problem, int target_points = 10000);

/// Caches the evaluation grid, its reference values, and the network
/// workspace, so periodic error logging costs one forward pass.
class Evaluator {
 public:
  /// `cache_dir` (optional) holds binary reference tables keyed by problem
  /// and grid size; in-process runs additionally share tables by memo.
  Evaluator(const PDEProblem& problem, const MLPConfig& cfg, const std::string& cache_dir = "");
  ~Evaluator();
  Evaluator(Evaluator&&) noexcept;

  ErrorReport evaluate(const ParameterVector& theta);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

enum class RunStatus : std::uint8_t { ok, diverged, filtered };

const char* to_string(RunStatus status);
RunStatus run_status_from_string(const std::string& name);

/// One seeded training run: configuration echo, errors, timing, status.
struct RunRecord {
  std::string run_id;
  std::string problem;
  std::string sampler;
  std::string point_optimizer;  // empty unless the sampler is pacmann
  double stepsize = 0.0;
  int num_steps = 0;
  int period = 0;
  int n_collocation = 0;
  std::uint64_t seed = 0;
  RunStatus status = RunStatus::ok;
  ErrorReport errors;
  double final_loss = std::numeric_limits<double>::quiet_NaN();
  double wall_time_s = 0.0;
};

/// Marks cohort members whose final loss or error is far outside the cohort
/// median, which flags runs crippled by an unlucky weight initialization.
/// A cohort of one is never filtered. Only ok runs can become filtered.
void filter_divergent(std::vector<RunRecord>& records, double loss_factor = 100.0,
                      double l2_factor = 10.0);

struct AggregateStats {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation, n-1 denominator
  int count = 0;
};

/// Mean/sd of l2 over ok runs; order independent. Throws when no run is ok.
AggregateStats aggregate(const std::vector<RunRecord>& records);

/// Reference values on the problem's evaluation grid, point-major.
std::vector<double> reference_table(const PDEProblem& problem, int target_points = 10000);
std::string reference_table_path(const std::string& cache_dir, const std::string& problem,
                                 int n_points);
void save_reference_table(const std::string& path, const PDEProblem& problem,
                          int target_points = 10000);

/// Results CSV with the fixed column set; inapplicable fields stay empty.
extern const char* kResultsCsvHeader;
void write_results_csv(const std::string& path, const std::vector<RunRecord>& records);
std::string results_csv_row(const RunRecord& record);
std::vector<RunRecord> read_results_csv(const std::string& path);

}  // namespace pinn
