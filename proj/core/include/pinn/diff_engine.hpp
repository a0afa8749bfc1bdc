#pragma once

#include <memory>
#include <span>
#include <vector>

#include "pinn/field.hpp"
#include "pinn/residual_op.hpp"

namespace pinn {

/// Exact value/gradient/Hessian of every field output with respect to the
/// input coordinates at one point.
std::vector<Jet2> eval_jet2(const DifferentiableField& field, const Point& p,
                            const ParameterVector& theta);

/// A per-point scalar contribution to a loss, differentiable with respect to
/// the jet channels it reads and any trailing inverse scalars.
class PointwiseTerm {
 public:
  virtual ~PointwiseTerm() = default;

  /// Jet channels are output-major as in ResidualArgs.
  virtual double value(int point_index, const Point& p, const JetLayout& layout,
                       const double* jets, std::span<const double> extras) const = 0;

  /// Writes d(term)/d(channel) into `jet_adjoint` (pre-zeroed, same shape as
  /// `jets`) and accumulates d(term)/d(extras) into `extras_adjoint`.
  virtual void derivatives(int point_index, const Point& p, const JetLayout& layout,
                           const double* jets, std::span<const double> extras,
                           double* jet_adjoint, std::span<double> extras_adjoint) const = 0;
};

/// Squared residual summed over components: sum_c r_c^2.
class ResidualSqTerm final : public PointwiseTerm {
 public:
  explicit ResidualSqTerm(const ResidualOp* op) : op_(op) {}

  double value(int point_index, const Point& p, const JetLayout& layout, const double* jets,
               std::span<const double> extras) const override;
  void derivatives(int point_index, const Point& p, const JetLayout& layout, const double* jets,
                   std::span<const double> extras, double* jet_adjoint,
                   std::span<double> extras_adjoint) const override;

 private:
  const ResidualOp* op_;
};

/// Squared mismatch of the field values against fixed per-point targets,
/// summed over outputs: sum_o (u_o - g_o)^2.
class TargetMseTerm final : public PointwiseTerm {
 public:
  TargetMseTerm(std::vector<double> targets, int n_outputs)
      : targets_(std::move(targets)), n_outputs_(n_outputs) {}

  double value(int point_index, const Point& p, const JetLayout& layout, const double* jets,
               std::span<const double> extras) const override;
  void derivatives(int point_index, const Point& p, const JetLayout& layout, const double* jets,
                   std::span<const double> extras, double* jet_adjoint,
                   std::span<double> extras_adjoint) const override;

 private:
  std::vector<double> targets_;  // point-major
  int n_outputs_;
};

/// weight * mean over points of term(point).
struct LossBatch {
  const DifferentiableField* field = nullptr;
  std::vector<Point> points;
  JetLayout layout;
  std::shared_ptr<const PointwiseTerm> term;
  double weight = 1.0;
  /// Trailing entries of theta passed to the term as inverse scalars.
  int n_extras = 0;
};

/// Composite loss: a sum of batches plus optional direct functions of theta.
/// Batches over MLP-backed fields contribute reverse-mode parameter
/// gradients; direct terms supply their own gradient.
class LossFunction {
 public:
  struct ThetaTerm {
    std::function<double(const ParameterVector&)> value;
    std::function<void(const ParameterVector&, double coeff, std::span<double> grad)> add_gradient;
    double weight = 1.0;
  };

  std::vector<LossBatch> batches;
  std::vector<ThetaTerm> theta_terms;

  double value(const ParameterVector& theta, std::vector<double>* per_batch = nullptr) const;
  double value_and_gradient(const ParameterVector& theta, std::span<double> grad,
                            std::vector<double>* per_batch = nullptr) const;

  LossFunction();
  ~LossFunction();
  LossFunction(LossFunction&&) noexcept;
  LossFunction& operator=(LossFunction&&) noexcept;

 private:
  double run(const ParameterVector& theta, std::span<double>* grad,
             std::vector<double>* per_batch) const;

  struct EngineCache;
  mutable std::unique_ptr<EngineCache> engines_;
};

/// dLoss/dtheta, same length as theta.
std::vector<double> param_gradient(const LossFunction& loss, const ParameterVector& theta);

/// Reusable batched evaluator of residual components at a set of points.
class ResidualValues {
 public:
  ResidualValues(const ResidualOp& op, const DifferentiableField& field);
  ~ResidualValues();
  ResidualValues(ResidualValues&&) noexcept;

  /// Row-major (n_points x n_components).
  const std::vector<double>& eval(std::span<const Point> points, const ParameterVector& theta,
                                  std::span<const double> inverse);

  int n_components() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Reusable evaluator for the gradient of the squared residual with respect
/// to the input coordinates (third order in the field inputs overall). Keeps
/// the propagation workspace alive so repeated movement steps do not pay for
/// reallocation.
class SqResidualGradient {
 public:
  SqResidualGradient(const ResidualOp& op, const DifferentiableField& field);
  ~SqResidualGradient();
  SqResidualGradient(SqResidualGradient&&) noexcept;

  /// One row of input_dim entries per point.
  const std::vector<std::vector<double>>& eval(std::span<const Point> points,
                                               const ParameterVector& theta,
                                               std::span<const double> inverse);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Gradient of the squared residual (summed over components) with respect to
/// the input coordinates at one point.
std::vector<double> input_gradient_sq_residual(const ResidualOp& op,
                                               const DifferentiableField& field, const Point& p,
                                               const ParameterVector& theta,
                                               std::span<const double> inverse);

/// Batched form: one row of d entries per point.
std::vector<std::vector<double>> input_gradient_sq_residual_batch(
    const ResidualOp& op, const DifferentiableField& field, std::span<const Point> points,
    const ParameterVector& theta, std::span<const double> inverse);

}  // namespace pinn
