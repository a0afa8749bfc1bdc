#pragma once

#include <span>
#include <vector>

#include "pinn/jet.hpp"

namespace pinn {

/// Truncated multivariate Taylor scalar: carries a value together with every
/// mixed partial up to the layout's order (at most three). Arithmetic on
/// TaylorVar propagates derivatives exactly, which is how closed-form
/// solutions are turned into jet-producing fields.
///
/// All operands of a binary operation must share one layout object; layouts
/// here are always full (no masking).
class TaylorVar {
 public:
  TaylorVar() = default;

  static TaylorVar constant(const JetLayout* layout, double value);
  /// Seeds d/dx_direction = 1.
  static TaylorVar variable(const JetLayout* layout, double value, int direction);

  double value() const { return ch_[0]; }
  const std::vector<double>& channels() const { return ch_; }
  const JetLayout* layout() const { return layout_; }

  TaylorVar operator-() const;
  TaylorVar& operator+=(const TaylorVar& o);
  TaylorVar& operator-=(const TaylorVar& o);

  friend TaylorVar operator+(TaylorVar a, const TaylorVar& b) { return a += b; }
  friend TaylorVar operator-(TaylorVar a, const TaylorVar& b) { return a -= b; }
  friend TaylorVar operator*(const TaylorVar& a, const TaylorVar& b);
  friend TaylorVar operator/(const TaylorVar& a, const TaylorVar& b);

  friend TaylorVar operator+(TaylorVar a, double s);
  friend TaylorVar operator+(double s, TaylorVar a) { return std::move(a) + s; }
  friend TaylorVar operator-(TaylorVar a, double s) { return std::move(a) + (-s); }
  friend TaylorVar operator*(TaylorVar a, double s);
  friend TaylorVar operator*(double s, TaylorVar a) { return std::move(a) * s; }
  friend TaylorVar operator/(TaylorVar a, double s) { return std::move(a) * (1.0 / s); }

  /// Chain rule through a scalar function given its first three derivatives
  /// at the operand's value.
  friend TaylorVar compose_unary(const TaylorVar& u, double g0, double g1, double g2, double g3);

  friend TaylorVar sin(const TaylorVar& u);
  friend TaylorVar cos(const TaylorVar& u);
  friend TaylorVar exp(const TaylorVar& u);
  friend TaylorVar tanh(const TaylorVar& u);
  friend TaylorVar sqrt(const TaylorVar& u);

 private:
  explicit TaylorVar(const JetLayout* layout) : layout_(layout), ch_(layout->channels(), 0.0) {}

  const JetLayout* layout_ = nullptr;
  std::vector<double> ch_;
};

/// Full layouts shared by TaylorVar users, one per (dim, order). Returned
/// pointers stay valid for the program lifetime.
const JetLayout* full_layout(int dim, int order);

}  // namespace pinn
