#pragma once

#include <functional>
#include <span>
#include <vector>

#include "pinn/jet.hpp"
#include "pinn/jet_algebra.hpp"
#include "pinn/point.hpp"

namespace pinn {

/// Flat trainable parameters: all weights and biases of the network followed
/// by any inverse-problem scalars. Analytic fields take an empty vector.
using ParameterVector = std::vector<double>;

/// A deterministic field u(x; theta) that can report derivative jets of its
/// outputs with respect to the input coordinates.
class DifferentiableField {
 public:
  virtual ~DifferentiableField() = default;

  virtual int input_dim() const = 0;
  virtual int output_dim() const = 0;
  /// Number of parameters the field expects; 0 for closed-form fields.
  virtual int param_count() const = 0;

  /// Evaluates jets for every point. `out` is resized by the callee.
  virtual void eval_jets(const JetLayout& layout, std::span<const Point> points,
                         const ParameterVector& theta, JetBatch& out) const = 0;
};

/// Closed-form field defined by arithmetic on TaylorVar; derivatives up to
/// third order come out exact. Used for manufactured solutions and test
/// fields.
class AnalyticField final : public DifferentiableField {
 public:
  using Fn = std::function<void(std::span<const TaylorVar> coords, std::span<TaylorVar> out)>;

  AnalyticField(int input_dim, int output_dim, Fn fn)
      : input_dim_(input_dim), output_dim_(output_dim), fn_(std::move(fn)) {}

  int input_dim() const override { return input_dim_; }
  int output_dim() const override { return output_dim_; }
  int param_count() const override { return 0; }

  void eval_jets(const JetLayout& layout, std::span<const Point> points,
                 const ParameterVector& theta, JetBatch& out) const override;

 private:
  int input_dim_;
  int output_dim_;
  Fn fn_;
};

}  // namespace pinn
