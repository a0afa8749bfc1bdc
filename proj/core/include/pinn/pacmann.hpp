#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>

#include "pinn/pde.hpp"
#include "pinn/samplers.hpp"

namespace pinn {

/// The optimization rule applied to collocation-point coordinates when
/// ascending the squared-residual landscape.
enum class PointOptimizerKind : std::uint8_t {
  gradient_ascent,
  nonlinear_ga,
  rmsprop,
  momentum,
  adam,
  golden_section,
};

PointOptimizerKind point_optimizer_from_string(const std::string& name);
const char* to_string(PointOptimizerKind kind);

struct PacmannConfig {
  PointOptimizerKind optimizer = PointOptimizerKind::adam;
  double stepsize = 1e-5;  // s
  int num_steps = 5;       // T
  int period = 50;         // P
  double rmsprop_beta = 0.999;
  double momentum_beta = 0.9;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double eps = 1e-8;

  void validate() const;
};

/// Per-point optimizer accumulators; reset to zero at the start of every
/// resampling event.
struct PointOptimizerState {
  std::vector<double> v;  // momentum / first-moment average
  std::vector<double> s;  // squared-gradient average
  int step = 0;

  explicit PointOptimizerState(int dim) : v(dim, 0.0), s(dim, 0.0) {}
  bool is_zero() const;
};

/// One coordinatewise update of a single point toward larger squared
/// residual. Throws NumericError on a non-finite gradient, leaving the state
/// untouched. golden_section is not a stepwise rule and is rejected here.
Point inner_step(PointOptimizerKind kind, const Point& x, std::span<const double> g,
                 PointOptimizerState& state, const PacmannConfig& cfg);

/// Golden-section line search along the ray from x toward x + s*g, with T
/// interval shrinks; returns the midpoint of the final interval mapped back
/// to the full space. A zero gradient returns x unchanged.
Point golden_section_move(const Point& x, std::span<const double> g,
                          const std::function<double(const Point&)>& objective, double s, int T);

struct PacmannMoveStats {
  int replaced = 0;
};

/// One resampling event: every collocation point independently takes T
/// optimizer steps (or one golden-section search) on the frozen
/// squared-residual landscape; a point stepping outside the closed box is
/// immediately replaced by a uniform draw and frozen for the rest of the
/// event. Cardinality is preserved.
CollocationSet pacmann_move(const CollocationSet& set, const PDEProblem& problem,
                            const DifferentiableField& field, const ParameterVector& theta,
                            const PacmannConfig& cfg, std::uint64_t seed,
                            PacmannMoveStats* stats = nullptr);

}  // namespace pinn
