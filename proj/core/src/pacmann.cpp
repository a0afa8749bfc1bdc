#include "pinn/pacmann.hpp"

#include <cmath>

namespace pinn {

PointOptimizerKind point_optimizer_from_string(const std::string& name) {
  if (name == "gradient_ascent") return PointOptimizerKind::gradient_ascent;
  if (name == "nonlinear_ga") return PointOptimizerKind::nonlinear_ga;
  if (name == "rmsprop") return PointOptimizerKind::rmsprop;
  if (name == "momentum") return PointOptimizerKind::momentum;
  if (name == "adam") return PointOptimizerKind::adam;
  if (name == "golden_section") return PointOptimizerKind::golden_section;
  throw ConfigError("unknown point optimizer: " + name);
}

const char* to_string(PointOptimizerKind kind) {
  switch (kind) {
    case PointOptimizerKind::gradient_ascent: return "gradient_ascent";
    case PointOptimizerKind::nonlinear_ga: return "nonlinear_ga";
    case PointOptimizerKind::rmsprop: return "rmsprop";
    case PointOptimizerKind::momentum: return "momentum";
    case PointOptimizerKind::adam: return "adam";
    case PointOptimizerKind::golden_section: return "golden_section";
  }
  return "?";
}

void PacmannConfig::validate() const {
  // stepsize 0 is tolerated and makes every event an exact identity
  if (stepsize < 0.0) throw ConfigError("pacmann: stepsize must be >= 0");
  if (num_steps < 0) throw ConfigError("pacmann: num_steps must be >= 0");
  if (period < 1) throw ConfigError("pacmann: period must be >= 1");
}

bool PointOptimizerState::is_zero() const {
  if (step != 0) return false;
  for (double x : v)
    if (x != 0.0) return false;
  for (double x : s)
    if (x != 0.0) return false;
  return true;
}

Point inner_step(PointOptimizerKind kind, const Point& x, std::span<const double> g,
                 PointOptimizerState& state, const PacmannConfig& cfg) {
  const std::size_t d = x.size();
  if (g.size() != d || state.v.size() != d)
    throw ConfigError("inner_step: dimension mismatch");
  for (double gi : g)
    if (!std::isfinite(gi)) throw NumericError("inner_step: non-finite gradient");

  Point out = x;
  const double s = cfg.stepsize;
  switch (kind) {
    case PointOptimizerKind::gradient_ascent:
      for (std::size_t i = 0; i < d; ++i) out[i] += s * g[i];
      break;
    case PointOptimizerKind::nonlinear_ga:
      for (std::size_t i = 0; i < d; ++i) out[i] += s * std::tanh(g[i]);
      break;
    case PointOptimizerKind::rmsprop: {
      const double beta = cfg.rmsprop_beta;
      for (std::size_t i = 0; i < d; ++i) {
        state.s[i] = beta * state.s[i] + (1.0 - beta) * g[i] * g[i];
        out[i] += s * g[i] / std::sqrt(state.s[i] + cfg.eps);
      }
      break;
    }
    case PointOptimizerKind::momentum: {
      const double beta = cfg.momentum_beta;
      for (std::size_t i = 0; i < d; ++i) {
        state.v[i] = beta * state.v[i] + (1.0 - beta) * g[i];
        out[i] += s * state.v[i];
      }
      break;
    }
    case PointOptimizerKind::adam: {
      const int step = ++state.step;
      const double b1 = cfg.adam_beta1, b2 = cfg.adam_beta2;
      const double c1 = 1.0 - std::pow(b1, step);
      const double c2 = 1.0 - std::pow(b2, step);
      for (std::size_t i = 0; i < d; ++i) {
        state.v[i] = b1 * state.v[i] + (1.0 - b1) * g[i];
        state.s[i] = b2 * state.s[i] + (1.0 - b2) * g[i] * g[i];
        const double vhat = state.v[i] / c1;
        const double shat = state.s[i] / c2;
        out[i] += s * vhat / std::sqrt(shat + cfg.eps);
      }
      break;
    }
    case PointOptimizerKind::golden_section:
      throw ConfigError("inner_step: golden_section is a line search, not a stepwise rule");
  }
  return out;
}

namespace {

constexpr double kInvPhi = 0.6180339887498948482;  // 1/phi

Point ray_point(const Point& x, std::span<const double> g, double s, double xi) {
  Point p = x;
  for (std::size_t i = 0; i < p.size(); ++i) p[i] += xi * s * g[i];
  return p;
}

}  // namespace

Point golden_section_move(const Point& x, std::span<const double> g,
                          const std::function<double(const Point&)>& objective, double s, int T) {
  bool zero = true;
  for (double gi : g) {
    if (!std::isfinite(gi)) throw NumericError("golden_section_move: non-finite gradient");
    if (gi != 0.0) zero = false;
  }
  if (zero || s == 0.0) return x;

  double a = 0.0, b = 1.0;
  double xl = a + (1.0 - kInvPhi) * (b - a);
  double xr = a + kInvPhi * (b - a);
  double fl = objective(ray_point(x, g, s, xl));
  double fr = objective(ray_point(x, g, s, xr));
  for (int it = 0; it < T; ++it) {
    if (fl > fr) {
      b = xr;
      xr = xl;
      fr = fl;
      xl = a + (1.0 - kInvPhi) * (b - a);
      fl = objective(ray_point(x, g, s, xl));
    } else {
      a = xl;
      xl = xr;
      fl = fr;
      xr = a + kInvPhi * (b - a);
      fr = objective(ray_point(x, g, s, xr));
    }
  }
  return ray_point(x, g, s, 0.5 * (a + b));
}

namespace {

// Lockstep golden-section search over many points: every iteration gathers
// one probe per still-active point into a single batched residual
// evaluation. The per-point arithmetic matches golden_section_move exactly.
void golden_move_batch(std::vector<Point>& points, const std::vector<std::vector<double>>& grads,
                       ResidualValues& values, const ParameterVector& theta,
                       std::span<const double> inverse, double s, int T) {
  const std::size_t n = points.size();
  struct Bracket {
    double a = 0.0, b = 1.0, xl = 0.0, xr = 0.0, fl = 0.0, fr = 0.0;
    bool active = false;
    bool probe_left = false;
  };
  std::vector<Bracket> brackets(n);
  std::vector<Point> probes;
  std::vector<std::size_t> probe_owner;

  auto batch_eval = [&](auto&& location_of, auto&& store) {
    probes.clear();
    probe_owner.clear();
    for (std::size_t i = 0; i < n; ++i) {
      if (!brackets[i].active) continue;
      probes.push_back(location_of(i));
      probe_owner.push_back(i);
    }
    if (probes.empty()) return;
    const auto& r = values.eval(probes, theta, inverse);
    const int nc = values.n_components();
    for (std::size_t k = 0; k < probe_owner.size(); ++k) {
      double acc = 0.0;
      for (int c = 0; c < nc; ++c) acc += r[k * nc + c] * r[k * nc + c];
      store(probe_owner[k], acc);
    }
  };

  for (std::size_t i = 0; i < n; ++i) {
    Bracket& br = brackets[i];
    bool zero = true;
    for (double gi : grads[i]) zero = zero && gi == 0.0;
    br.active = !zero;
    br.xl = 1.0 - kInvPhi;
    br.xr = kInvPhi;
  }
  batch_eval([&](std::size_t i) { return ray_point(points[i], grads[i], s, brackets[i].xl); },
             [&](std::size_t i, double f) { brackets[i].fl = f; });
  batch_eval([&](std::size_t i) { return ray_point(points[i], grads[i], s, brackets[i].xr); },
             [&](std::size_t i, double f) { brackets[i].fr = f; });

  for (int it = 0; it < T; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      Bracket& br = brackets[i];
      if (!br.active) continue;
      if (br.fl > br.fr) {
        br.b = br.xr;
        br.xr = br.xl;
        br.fr = br.fl;
        br.xl = br.a + (1.0 - kInvPhi) * (br.b - br.a);
        br.probe_left = true;
      } else {
        br.a = br.xl;
        br.xl = br.xr;
        br.fl = br.fr;
        br.xr = br.a + kInvPhi * (br.b - br.a);
        br.probe_left = false;
      }
    }
    if (it + 1 == T) break;  // the final interval alone determines the result
    batch_eval(
        [&](std::size_t i) {
          const Bracket& br = brackets[i];
          return ray_point(points[i], grads[i], s, br.probe_left ? br.xl : br.xr);
        },
        [&](std::size_t i, double f) {
          Bracket& br = brackets[i];
          (br.probe_left ? br.fl : br.fr) = f;
        });
  }

  for (std::size_t i = 0; i < n; ++i) {
    const Bracket& br = brackets[i];
    if (!br.active) continue;
    points[i] = ray_point(points[i], grads[i], s, 0.5 * (br.a + br.b));
  }
}

}  // namespace

CollocationSet pacmann_move(const CollocationSet& set, const PDEProblem& problem,
                            const DifferentiableField& field, const ParameterVector& theta,
                            const PacmannConfig& cfg, std::uint64_t seed,
                            PacmannMoveStats* stats) {
  cfg.validate();
  set.validate(problem.box);
  CollocationSet out = set;
  if (cfg.num_steps == 0 || cfg.stepsize == 0.0) {
    if (stats) *stats = {};
    return out;
  }

  const std::span<const double> inverse(theta.data() + theta.size() - problem.n_inverse,
                                        static_cast<std::size_t>(problem.n_inverse));
  Rng replace_rng = Rng::derive(seed, "pacmann-replace");
  SqResidualGradient grad_eval(problem.residual, field);
  PacmannMoveStats local;
  const std::size_t n = out.size();
  const int d = problem.input_dim;

  std::vector<bool> active(n, true);
  std::vector<std::size_t> active_index;
  std::vector<Point> active_points;

  auto replace_point = [&](std::size_t i) {
    out.points[i] = replace_rng.uniform_in(problem.box);
    out.origins[i] = PointOrigin::replaced;
    active[i] = false;
    ++local.replaced;
  };

  if (cfg.optimizer == PointOptimizerKind::golden_section) {
    // one gradient per point, then a lockstep line search
    const auto& grads = grad_eval.eval(out.points, theta, inverse);
    ResidualValues values(problem.residual, field);
    std::vector<Point> moved = out.points;
    golden_move_batch(moved, grads, values, theta, inverse, cfg.stepsize, cfg.num_steps);
    for (std::size_t i = 0; i < n; ++i) {
      if (problem.box.contains(moved[i])) {
        out.points[i] = std::move(moved[i]);
      } else {
        replace_point(i);
      }
    }
  } else {
    std::vector<PointOptimizerState> states(n, PointOptimizerState(d));
    for (const auto& state : states)
      if (!state.is_zero()) throw NumericError("pacmann_move: optimizer state not zeroed");
    for (int step = 0; step < cfg.num_steps; ++step) {
      active_index.clear();
      active_points.clear();
      for (std::size_t i = 0; i < n; ++i)
        if (active[i]) {
          active_index.push_back(i);
          active_points.push_back(out.points[i]);
        }
      if (active_points.empty()) break;
      const auto& grads = grad_eval.eval(active_points, theta, inverse);
      for (std::size_t k = 0; k < active_index.size(); ++k) {
        const std::size_t i = active_index[k];
        Point moved = inner_step(cfg.optimizer, out.points[i], grads[k], states[i], cfg);
        if (problem.box.contains(moved)) {
          out.points[i] = std::move(moved);
        } else {
          replace_point(i);
        }
      }
    }
  }

  out.validate(problem.box);
  if (stats) *stats = local;
  return out;
}

}  // namespace pinn
