#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pinn/diff_engine.hpp"
#include "pinn/mlp.hpp"
#include "pinn/references.hpp"
#include "pinn/residual_op.hpp"
#include "pinn/rng.hpp"

namespace pinn {

/// Physical constants of the benchmark problems.
struct ProblemParams {
  double nu = 0.01 / 3.141592653589793238;  // Burgers viscosity
  double d_ac = 0.001;                      // Allen-Cahn diffusion
  double lambda1 = 1.0;                     // Navier-Stokes convection scale (true value)
  double lambda2 = 0.01;                    // Navier-Stokes viscosity (true value)
};

struct PointCounts {
  int n_r = 0;
  int n_bc = 0;
  int n_ic = 0;
  int n_ref = 0;
};

/// Dirichlet data on a set of domain faces: a point sampler restricted to
/// those faces plus the target values g the network is matched against.
struct DirichletSpec {
  std::function<std::vector<Point>(int n, Rng& rng)> sample;
  std::function<void(const Point&, std::span<double>)> target;
};

/// One benchmark problem: domain, residual operator, boundary/initial data,
/// reference solution, and its standard point counts and architecture.
struct PDEProblem {
  std::string name;
  DomainBox box;
  int input_dim = 0;
  int output_dim = 0;

  ResidualOp residual;
  DirichletSpec boundary;
  std::optional<DirichletSpec> initial;

  std::shared_ptr<const ReferenceSolution> reference;
  /// Exact or manufactured solution as a jet-producing field, when one
  /// exists in closed form (Poisson, Taylor-Green, and test problems).
  std::shared_ptr<const DifferentiableField> exact_field;

  PointCounts counts;
  MLPConfig default_net;

  int n_inverse = 0;
  std::vector<std::string> inverse_names;
  std::vector<double> inverse_truth;

  ProblemParams params;
};

PDEProblem make_burgers();
PDEProblem make_allen_cahn();
PDEProblem make_poisson5();
PDEProblem make_navier_stokes_inverse();

/// Problems by CLI name: burgers, allen_cahn, poisson5, navier_stokes.
PDEProblem make_problem(const std::string& name);
std::vector<std::string> problem_names();

/// Evaluates a residual operator on explicit jets (one per output).
void eval_residual(const ResidualOp& op, const Point& p, std::span<const Jet2> jets,
                   std::span<const double> inverse, std::span<double> out);

/// The spec'd per-problem residual forms over explicit jets.
double residual_burgers(const Point& p, const Jet2& u, double nu);
double residual_allen_cahn(const Point& p, const Jet2& u, double d);
double residual_poisson5(const Point& p, const Jet2& v);
std::array<double, 2> residual_navier_stokes(const Point& p, const Jet2& u, const Jet2& v,
                                             const Jet2& pressure, double lambda1, double lambda2);

/// Problem-level wrapper over the diff-engine operation.
std::vector<double> input_gradient_sq_residual(const PDEProblem& problem,
                                               const DifferentiableField& field, const Point& p,
                                               const ParameterVector& theta);

}  // namespace pinn
