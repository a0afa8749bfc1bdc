#include "pinn/trainer.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "src/csv_format.hpp"

namespace pinn {

void LossWeights::validate() const {
  if (residual <= 0.0 || ic <= 0.0 || bc <= 0.0 || ref <= 0.0)
    throw ConfigError("loss weights must be positive");
}

void TrainSchedule::validate() const {
  if (blocks < 1) throw ConfigError("schedule: blocks must be >= 1");
  if (adam_iters < 0 || lbfgs_iters < 0)
    throw ConfigError("schedule: iteration counts must be >= 0");
  if (adam_lr <= 0.0) throw ConfigError("schedule: adam_lr must be positive");
  if (resample_period < 1) throw ConfigError("schedule: resample period must be >= 1");
  if (adam_iters > 0 && resample_period > adam_iters)
    throw ConfigError("schedule: resample period exceeds the Adam phase");
}

PinnLoss::PinnLoss(const PDEProblem& problem, const DifferentiableField& field, const LossWeights& weights,
                   std::vector<Point> bc_points, std::vector<Point> ic_points,
                   std::vector<Point> ref_points, std::vector<double> ref_targets) {
  weights.validate();
  const int n_out = problem.output_dim;

  {
    LossBatch batch;
    batch.field = &field;
    batch.layout = JetLayout::second_order(problem.input_dim, problem.residual.hessian_pairs);
    batch.term = std::make_shared<ResidualSqTerm>(&problem.residual);
    batch.weight = weights.residual;
    batch.n_extras = problem.n_inverse;
    residual_index_ = static_cast<int>(loss_.batches.size());
    loss_.batches.push_back(std::move(batch));
  }
  auto add_value_batch = [&](std::vector<Point> points, std::vector<double> targets, double weight,
                             int& index) {
    if (points.empty()) return;
    LossBatch batch;
    batch.field = &field;
    batch.points = std::move(points);
    batch.layout = JetLayout::value_only(problem.input_dim);
    batch.term = std::make_shared<TargetMseTerm>(std::move(targets), n_out);
    batch.weight = weight;
    index = static_cast<int>(loss_.batches.size());
    loss_.batches.push_back(std::move(batch));
  };

  auto targets_for = [&](const std::vector<Point>& pts,
                         const DirichletSpec& spec) {
    std::vector<double> targets(pts.size() * static_cast<std::size_t>(n_out));
    for (std::size_t i = 0; i < pts.size(); ++i)
      spec.target(pts[i], std::span<double>(targets.data() + i * n_out, n_out));
    return targets;
  };

  if (!ic_points.empty() && problem.initial) {
    auto targets = targets_for(ic_points, *problem.initial);
    add_value_batch(std::move(ic_points), std::move(targets), weights.ic, ic_index_);
  }
  if (!bc_points.empty()) {
    auto targets = targets_for(bc_points, problem.boundary);
    add_value_batch(std::move(bc_points), std::move(targets), weights.bc, bc_index_);
  }
  if (!ref_points.empty())
    add_value_batch(std::move(ref_points), std::move(ref_targets), weights.ref, ref_index_);
}

void PinnLoss::set_collocation(const std::vector<Point>& points) {
  loss_.batches[residual_index_].points = points;
}

LossBreakdown PinnLoss::map_breakdown(double total, const std::vector<double>& per_batch) const {
  LossBreakdown breakdown;
  breakdown.total = total;
  breakdown.residual = per_batch[residual_index_];
  if (ic_index_ >= 0) breakdown.ic = per_batch[ic_index_];
  if (bc_index_ >= 0) breakdown.bc = per_batch[bc_index_];
  if (ref_index_ >= 0) breakdown.ref = per_batch[ref_index_];
  return breakdown;
}

LossBreakdown PinnLoss::value(const ParameterVector& theta) const {
  std::vector<double> per_batch;
  const double total = loss_.value(theta, &per_batch);
  return map_breakdown(total, per_batch);
}

LossBreakdown PinnLoss::value_and_gradient(const ParameterVector& theta,
                                           std::span<double> grad) const {
  std::vector<double> per_batch;
  const double total = loss_.value_and_gradient(theta, grad, &per_batch);
  return map_breakdown(total, per_batch);
}

namespace {

// Reference rows (t, x, y, ...) -> points in coordinate order (x, y, t).
void observation_points(const ObservationSet& obs, int n_needed, std::uint64_t seed,
                        std::vector<Point>& points, std::vector<double>& targets) {
  const int n_rows = static_cast<int>(obs.rows.size());
  if (n_rows < n_needed)
    throw ConfigError("observations: fewer rows than the configured N_ref");
  std::vector<std::size_t> pick(n_rows);
  for (int i = 0; i < n_rows; ++i) pick[i] = i;
  if (n_rows > n_needed) {
    // seeded partial Fisher-Yates
    Rng rng = Rng::derive(seed, "obs-subsample");
    for (int i = 0; i < n_needed; ++i) {
      const std::size_t j = i + rng.uniform_index(n_rows - i);
      std::swap(pick[i], pick[j]);
    }
  }
  points.clear();
  targets.clear();
  for (int i = 0; i < n_needed; ++i) {
    const auto& row = obs.rows[pick[i]];
    points.push_back({row[1], row[2], row[0]});
    targets.insert(targets.end(), {row[3], row[4], row[5]});
  }
}

}  // namespace

LossBreakdown compute_loss(const PDEProblem& problem, const MLPConfig& cfg,
                           const ParameterVector& theta, const std::vector<Point>& collocation,
                           const std::vector<Point>& ic_points, const std::vector<Point>& bc_points,
                           const LossWeights& weights, const ObservationSet* observations) {
  MLPField field(cfg);
  std::vector<Point> ref_points;
  std::vector<double> ref_targets;
  if (problem.counts.n_ref > 0 && observations != nullptr)
    observation_points(*observations, problem.counts.n_ref, 0, ref_points, ref_targets);
  PinnLoss loss(problem, field, weights, bc_points, ic_points, std::move(ref_points),
                std::move(ref_targets));
  loss.set_collocation(collocation);
  return loss.value(theta);
}

void adam_param_step(AdamState& state, ParameterVector& theta, std::span<const double> grad,
                     double lr, double beta1, double beta2, double eps) {
  if (grad.size() != theta.size() || state.m.size() != theta.size())
    throw ConfigError("adam_param_step: size mismatch");
  const long t = ++state.step;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < theta.size(); ++i) {
    state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * grad[i];
    state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * grad[i] * grad[i];
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    theta[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

TrainLogCsv::TrainLogCsv(const std::string& path, const std::vector<std::string>& inverse_names)
    : path_(path), n_inverse_(static_cast<int>(inverse_names.size())) {
  std::ofstream out(path_);
  if (!out) throw ConfigError("TrainLogCsv: cannot open " + path_);
  out << "iteration,phase,loss_total,loss_r,loss_ic,loss_bc,loss_ref,l2_error";
  for (const std::string& name : inverse_names) out << ',' << name;
  out << '\n';
}

void TrainLogCsv::append(const TrainLogRow& row) {
  std::ofstream out(path_, std::ios::app);
  if (!out) throw ConfigError("TrainLogCsv: cannot append to " + path_);
  char buf[32];
  auto put = [&](double v) {
    format_g17(v, buf);
    out << ',' << buf;
  };
  out << row.iteration << ',' << row.phase;
  put(row.loss.total);
  put(row.loss.residual);
  put(row.loss.ic);
  put(row.loss.bc);
  put(row.loss.ref);
  put(row.l2_error);
  for (int k = 0; k < n_inverse_; ++k)
    put(k < static_cast<int>(row.inverse_values.size()) ? row.inverse_values[k] : 0.0);
  out << '\n';
}

std::vector<TrainLogRow> read_train_log_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("read_train_log_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) ||
      line.rfind("iteration,phase,loss_total,loss_r,loss_ic,loss_bc,loss_ref,l2_error", 0) != 0)
    throw ConfigError("read_train_log_csv: bad header in " + path);
  std::vector<TrainLogRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    TrainLogRow row;
    std::getline(ls, cell, ',');
    row.iteration = std::stol(cell);
    std::getline(ls, row.phase, ',');
    auto next = [&] {
      std::getline(ls, cell, ',');
      return std::stod(cell);
    };
    row.loss.total = next();
    row.loss.residual = next();
    row.loss.ic = next();
    row.loss.bc = next();
    row.loss.ref = next();
    row.l2_error = next();
    while (std::getline(ls, cell, ',')) row.inverse_values.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

TrainResult train(const PDEProblem& problem, const MLPConfig& net_cfg,
                  const TrainSchedule& schedule, const SamplerChoice& sampler,
                  const LossWeights& weights, std::uint64_t seed, const TrainOptions& options) {
  schedule.validate();
  weights.validate();
  net_cfg.validate();
  if (net_cfg.input_dim != problem.input_dim || net_cfg.output_dim != problem.output_dim ||
      net_cfg.n_inverse != problem.n_inverse)
    throw ConfigError("train: network does not match the problem");
  if (sampler.kind == SamplerKind::pacmann)
    sampler.pacmann.validate();
  else
    sampler.baseline.validate(problem.counts.n_r);
  if (problem.counts.n_ref > 0 && options.observations == nullptr)
    throw ConfigError("train: the problem requires reference observations");

  TrainResult result;
  MLPField field(net_cfg);
  result.theta = init_glorot(net_cfg, Rng::derive(seed, "net-init").next_u64());

  // fixed boundary/initial/reference sets for the whole run
  Rng bc_rng = Rng::derive(seed, "bc-points");
  Rng ic_rng = Rng::derive(seed, "ic-points");
  std::vector<Point> bc_points =
      problem.counts.n_bc > 0 ? problem.boundary.sample(problem.counts.n_bc, bc_rng)
                              : std::vector<Point>{};
  std::vector<Point> ic_points;
  if (problem.initial && problem.counts.n_ic > 0)
    ic_points = problem.initial->sample(problem.counts.n_ic, ic_rng);
  std::vector<Point> ref_points;
  std::vector<double> ref_targets;
  if (problem.counts.n_ref > 0)
    observation_points(*options.observations, problem.counts.n_ref,
                       Rng::derive(seed, "obs-pick").next_u64(), ref_points, ref_targets);

  PinnLoss loss(problem, field, weights, bc_points, ic_points, std::move(ref_points),
                std::move(ref_targets));

  // initial collocation layout: every strategy starts from a uniform
  // sampling method; the dynamic ones use the Hammersley layout
  result.collocation = sampler.kind == SamplerKind::uniform_grid
                           ? uniform_grid(problem.counts.n_r, problem.box)
                           : hammersley(problem.counts.n_r, problem.box);
  result.collocation.validate(problem.box);
  loss.set_collocation(result.collocation.points);
  if (options.snapshot_sink) options.snapshot_sink(0, result.collocation);

  std::optional<Evaluator> evaluator;
  auto current_l2 = [&](const ParameterVector& theta) {
    if (!options.evaluate_l2) return std::numeric_limits<double>::quiet_NaN();
    if (!evaluator) evaluator.emplace(problem, net_cfg);
    return evaluator->evaluate(theta).l2;
  };
  auto emit_log = [&](long iteration, const char* phase, const LossBreakdown& breakdown) {
    if (!options.log_sink) return;
    TrainLogRow row;
    row.iteration = iteration;
    row.phase = phase;
    row.loss = breakdown;
    row.l2_error = current_l2(result.theta);
    for (int k = 0; k < problem.n_inverse; ++k)
      row.inverse_values.push_back(result.theta[result.theta.size() - problem.n_inverse + k]);
    options.log_sink(row);
  };

  AdamState adam(result.theta.size());
  Lbfgs lbfgs(LbfgsOptions{});
  std::vector<double> grad(result.theta.size());
  const bool is_static = sampler_is_static(sampler.kind);
  const std::size_t initial_count = result.collocation.size();
  long iteration = 0;

  ResidualValues pool_values(problem.residual, field);

  auto resample_event = [&](long at_iteration) {
    // built fresh: theta's buffer may have been reallocated by an update
    const std::span<const double> inverse(
        result.theta.data() + result.theta.size() - problem.n_inverse,
        static_cast<std::size_t>(problem.n_inverse));
    // collocation updates never touch theta; static layouts never get here
    const std::uint64_t event_seed =
        Rng::derive(seed, "event", static_cast<std::uint64_t>(result.resample_events)).next_u64();
    switch (sampler.kind) {
      case SamplerKind::random_resample:
        result.collocation =
            resample_random(static_cast<int>(initial_count), problem.box, event_seed);
        break;
      case SamplerKind::rar:
      case SamplerKind::rad:
      case SamplerKind::rar_d: {
        const int pool_n = sampler.baseline.effective_pool(problem.counts.n_r);
        CollocationSet pool = resample_random(pool_n, problem.box, event_seed);
        const auto& r = pool_values.eval(pool.points, result.theta, inverse);
        const int nc = problem.residual.n_components;
        std::vector<double> magnitude(pool.size());
        for (std::size_t i = 0; i < pool.size(); ++i) {
          double acc = 0.0;
          for (int c = 0; c < nc; ++c) acc += r[i * nc + c] * r[i * nc + c];
          magnitude[i] = std::sqrt(acc);
        }
        if (sampler.kind == SamplerKind::rar) {
          result.collocation = rar_step(std::move(result.collocation), pool.points, magnitude,
                                        sampler.baseline.rar_add);
        } else if (sampler.kind == SamplerKind::rad) {
          result.collocation =
              rad_resample(static_cast<int>(result.collocation.size()), pool.points, magnitude,
                           sampler.baseline.rad_k, sampler.baseline.rad_c, event_seed);
        } else {
          result.collocation =
              rard_step(std::move(result.collocation), pool.points, magnitude,
                        sampler.baseline.rar_add, sampler.baseline.rad_k, sampler.baseline.rad_c,
                        event_seed);
        }
        break;
      }
      case SamplerKind::pacmann: {
        PacmannMoveStats stats;
        result.collocation = pacmann_move(result.collocation, problem, field, result.theta,
                                          sampler.pacmann, event_seed, &stats);
        result.replaced_points += stats.replaced;
        break;
      }
      default:
        throw ConfigError("train: static sampler reached a resampling event");
    }
    result.collocation.validate(problem.box);
    loss.set_collocation(result.collocation.points);
    ++result.resample_events;
    if (options.snapshot_sink) options.snapshot_sink(at_iteration, result.collocation);
  };

  const int period = sampler.kind == SamplerKind::pacmann ? sampler.pacmann.period
                                                          : sampler.baseline.period;

  try {
    for (int block = 0; block < schedule.blocks; ++block) {
      // Adam phase with periodic resampling
      for (int k = 1; k <= schedule.adam_iters; ++k) {
        const LossBreakdown breakdown = loss.value_and_gradient(result.theta, grad);
        adam_param_step(adam, result.theta, grad, schedule.adam_lr);
        ++iteration;
        if (options.log_sink && (iteration % options.log_every == 0 || k == schedule.adam_iters))
          emit_log(iteration, "adam", breakdown);
        if (!is_static && k % period == 0) resample_event(iteration);
      }
      // L-BFGS phase on the frozen collocation set; history restarts per block
      lbfgs.reset();
      for (int k = 1; k <= schedule.lbfgs_iters; ++k) {
        const auto info = lbfgs.step(result.theta, [&](const ParameterVector& theta,
                                                       std::span<double> g) {
          return loss.value_and_gradient(theta, g).total;
        });
        if (info.line_search_failed) ++result.lbfgs_warnings;
        ++iteration;
        if (options.log_sink && (iteration % options.log_every == 0 || k == schedule.lbfgs_iters))
          emit_log(iteration, "lbfgs", loss.value(result.theta));
      }
    }
    result.final_loss = loss.value(result.theta);
  } catch (const NumericError& err) {
    result.diverged = true;
    result.divergence_reason = err.what();
  }
  result.iterations = iteration;
  return result;
}

}  // namespace pinn
