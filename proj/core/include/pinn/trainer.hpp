#pragma once

#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "pinn/evaluation.hpp"
#include "pinn/pacmann.hpp"
#include "pinn/pde.hpp"
#include "pinn/samplers.hpp"

namespace pinn {

struct LossWeights {
  double residual = 1.0;
  double ic = 1.0;
  double bc = 1.0;
  double ref = 1.0;

  void validate() const;
};

/// Block schedule: each block runs an Adam phase with periodic resampling
/// followed by an L-BFGS phase on the frozen collocation set.
struct TrainSchedule {
  int blocks = 5;
  int adam_iters = 7000;
  int lbfgs_iters = 3000;
  double adam_lr = 1e-3;
  int resample_period = 50;

  void validate() const;
};

struct LossBreakdown {
  double total = 0.0;
  double residual = 0.0;
  double ic = 0.0;
  double bc = 0.0;
  double ref = 0.0;
};

/// Composite PINN loss over one problem instance. Owns the boundary,
/// initial, and reference point sets; the collocation set is swapped in by
/// the caller as resampling events mutate it.
class PinnLoss {
 public:
  PinnLoss(const PDEProblem& problem, const DifferentiableField& field, const LossWeights& weights,
           std::vector<Point> bc_points, std::vector<Point> ic_points,
           std::vector<Point> ref_points, std::vector<double> ref_targets);

  void set_collocation(const std::vector<Point>& points);

  LossBreakdown value(const ParameterVector& theta) const;
  LossBreakdown value_and_gradient(const ParameterVector& theta, std::span<double> grad) const;

 private:
  LossBreakdown map_breakdown(double total, const std::vector<double>& per_batch) const;

  LossFunction loss_;
  int residual_index_ = -1, ic_index_ = -1, bc_index_ = -1, ref_index_ = -1;
};

/// Single loss evaluation with per-term breakdown; convenience over PinnLoss
/// for one-shot use. `sets` order: collocation, ic, bc; reference rows come
/// from `observations` (ignored unless the problem declares N_ref > 0).
LossBreakdown compute_loss(const PDEProblem& problem, const MLPConfig& cfg,
                           const ParameterVector& theta, const std::vector<Point>& collocation,
                           const std::vector<Point>& ic_points, const std::vector<Point>& bc_points,
                           const LossWeights& weights,
                           const ObservationSet* observations = nullptr);

/// Standard Adam (bias-corrected) over the trainable parameters.
struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  long step = 0;

  explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

void adam_param_step(AdamState& state, ParameterVector& theta, std::span<const double> grad,
                     double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

/// Limited-memory BFGS with a strong-Wolfe line search.
struct LbfgsOptions {
  int history = 50;
  double c1 = 1e-4;
  double c2 = 0.9;
  int max_line_trials = 25;
  double curvature_eps = 1e-10;  // skip pairs with y's <= eps |y||s|
};

class Lbfgs {
 public:
  /// Evaluates f at theta and writes the gradient.
  using Objective = std::function<double(const ParameterVector&, std::span<double>)>;

  explicit Lbfgs(LbfgsOptions options = {});

  struct StepInfo {
    double f = 0.0;
    double grad_norm = 0.0;
    bool line_search_failed = false;
  };

  /// One quasi-Newton iteration; theta is updated in place.
  StepInfo step(ParameterVector& theta, const Objective& objective);

  /// Clears history and cached evaluations (start of a new block).
  void reset();

  int history_size() const { return static_cast<int>(history_.size()); }

 private:
  struct Pair {
    std::vector<double> s, y;
    double rho;
  };

  LbfgsOptions options_;
  std::deque<Pair> history_;
  double gamma_ = 1.0;
  bool have_eval_ = false;
  double f_ = 0.0;
  std::vector<double> grad_;
};

/// Which collocation strategy drives the run.
struct SamplerChoice {
  SamplerKind kind = SamplerKind::hammersley;
  BaselineSamplerConfig baseline;
  PacmannConfig pacmann;
};

struct TrainLogRow {
  long iteration = 0;
  std::string phase;  // adam | lbfgs
  LossBreakdown loss;
  double l2_error = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> inverse_values;
};

/// Appends rows in the training-log CSV format:
/// iteration,phase,loss_total,loss_r,loss_ic,loss_bc,loss_ref,l2_error[,lambda1,lambda2]
class TrainLogCsv {
 public:
  TrainLogCsv(const std::string& path, const std::vector<std::string>& inverse_names);
  void append(const TrainLogRow& row);

 private:
  std::string path_;
  int n_inverse_;
};

std::vector<TrainLogRow> read_train_log_csv(const std::string& path);

struct TrainOptions {
  int log_every = 100;
  bool evaluate_l2 = true;
  std::function<void(const TrainLogRow&)> log_sink;
  /// Called with the initial layout (iteration 0) and after every
  /// resampling event.
  std::function<void(long iteration, const CollocationSet&)> snapshot_sink;
  const ObservationSet* observations = nullptr;
};

struct TrainResult {
  ParameterVector theta;
  CollocationSet collocation;
  long iterations = 0;
  int resample_events = 0;
  int replaced_points = 0;
  int lbfgs_warnings = 0;
  LossBreakdown final_loss;
  bool diverged = false;
  std::string divergence_reason;
};

/// Runs the full block schedule for one seed. Resampling happens only inside
/// Adam phases and never touches theta; static samplers keep their initial
/// layout for the whole run.
TrainResult train(const PDEProblem& problem, const MLPConfig& net_cfg,
                  const TrainSchedule& schedule, const SamplerChoice& sampler,
                  const LossWeights& weights, std::uint64_t seed,
                  const TrainOptions& options = {});

}  // namespace pinn
