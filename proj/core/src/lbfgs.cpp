#include <cmath>

#include "pinn/trainer.hpp"

namespace pinn {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace

Lbfgs::Lbfgs(LbfgsOptions options) : options_(options) {}

void Lbfgs::reset() {
  history_.clear();
  gamma_ = 1.0;
  have_eval_ = false;
}

Lbfgs::StepInfo Lbfgs::step(ParameterVector& theta, const Objective& objective) {
  const std::size_t n = theta.size();
  if (!have_eval_) {
    grad_.assign(n, 0.0);
    f_ = objective(theta, grad_);
    have_eval_ = true;
  }

  // two-loop recursion for d = -H g
  std::vector<double> d(grad_.begin(), grad_.end());
  std::vector<double> alpha(history_.size());
  for (std::size_t i = history_.size(); i-- > 0;) {
    const Pair& pair = history_[i];
    alpha[i] = pair.rho * dot(pair.s, d);
    for (std::size_t k = 0; k < n; ++k) d[k] -= alpha[i] * pair.y[k];
  }
  for (double& v : d) v *= gamma_;
  for (std::size_t i = 0; i < history_.size(); ++i) {
    const Pair& pair = history_[i];
    const double beta = pair.rho * dot(pair.y, d);
    for (std::size_t k = 0; k < n; ++k) d[k] += (alpha[i] - beta) * pair.s[k];
  }
  for (double& v : d) v = -v;

  double dg = dot(d, grad_);
  if (!(dg < 0.0)) {  // not a descent direction: restart from steepest descent
    history_.clear();
    gamma_ = 1.0;
    for (std::size_t k = 0; k < n; ++k) d[k] = -grad_[k];
    dg = dot(d, grad_);
  }

  // strong Wolfe line search on phi(a) = f(theta + a d)
  const double phi0 = f_;
  const double dphi0 = dg;
  ParameterVector trial(n);
  std::vector<double> trial_grad(n);
  int evals_left = options_.max_line_trials;

  auto eval_phi = [&](double a, double& phi, double& dphi) {
    for (std::size_t k = 0; k < n; ++k) trial[k] = theta[k] + a * d[k];
    phi = objective(trial, trial_grad);
    dphi = dot(trial_grad, d);
    --evals_left;
  };

  double accepted = -1.0;
  double phi_acc = 0.0;

  auto zoom = [&](double lo, double phi_lo, double hi, double phi_hi) {
    while (evals_left > 0) {
      const double a = 0.5 * (lo + hi);
      double phi, dphi;
      eval_phi(a, phi, dphi);
      if (phi > phi0 + options_.c1 * a * dphi0 || phi >= phi_lo) {
        hi = a;
        phi_hi = phi;
      } else {
        if (std::abs(dphi) <= -options_.c2 * dphi0) {
          accepted = a;
          phi_acc = phi;
          return;
        }
        if (dphi * (hi - lo) >= 0.0) {
          hi = lo;
          phi_hi = phi_lo;
        }
        lo = a;
        phi_lo = phi;
      }
      if (std::abs(hi - lo) < 1e-16) return;
    }
  };

  double a_prev = 0.0, phi_prev = phi0;
  double a = 1.0;
  bool first = true;
  while (evals_left > 0) {
    double phi, dphi;
    eval_phi(a, phi, dphi);
    if (phi > phi0 + options_.c1 * a * dphi0 || (!first && phi >= phi_prev)) {
      zoom(a_prev, phi_prev, a, phi);
      break;
    }
    if (std::abs(dphi) <= -options_.c2 * dphi0) {
      accepted = a;
      phi_acc = phi;
      break;
    }
    if (dphi >= 0.0) {
      zoom(a, phi, a_prev, phi_prev);
      break;
    }
    a_prev = a;
    phi_prev = phi;

    a *= 2.0;
    first = false;
  }

  StepInfo info;
  if (accepted > 0.0) {
    // trial/trial_grad hold the state at the accepted step only if it was
    // the most recent evaluation; recompute otherwise.
    bool fresh = true;
    for (std::size_t k = 0; k < n && fresh; ++k)
      fresh = trial[k] == theta[k] + accepted * d[k];
    if (!fresh) {
      double phi, dphi;
      eval_phi(accepted, phi, dphi);
      phi_acc = phi;
    }
    std::vector<double> s(n), y(n);
    for (std::size_t k = 0; k < n; ++k) {
      s[k] = accepted * d[k];
      y[k] = trial_grad[k] - grad_[k];
    }
    theta = trial;
    f_ = phi_acc;
    grad_ = trial_grad;
    const double ys = dot(y, s);
    if (ys > options_.curvature_eps * norm(y) * norm(s)) {
      gamma_ = ys / dot(y, y);
      history_.push_back({std::move(s), std::move(y), 1.0 / ys});
      if (static_cast<int>(history_.size()) > options_.history) history_.pop_front();
    }
  } else {
    // bounded gradient step fallback
    info.line_search_failed = true;
    const double g_norm = norm(grad_);
    if (g_norm > 0.0) {
      const double scale = 1e-3 / std::max(1.0, g_norm);
      for (std::size_t k = 0; k < n; ++k) theta[k] -= scale * grad_[k];
    }
    grad_.assign(n, 0.0);
    f_ = objective(theta, grad_);
  }

  info.f = f_;
  info.grad_norm = norm(grad_);
  return info;
}

}  // namespace pinn
