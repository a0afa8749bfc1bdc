#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "pinn/dual.hpp"
#include "pinn/jet.hpp"

namespace pinn {

/// Arguments handed to a residual operator at one point, generic over the
/// scalar type so the same definition supports plain evaluation and
/// forward-mode differentiation with respect to channels, coordinates, and
/// inverse scalars.
template <class T>
struct ResidualArgs {
  std::span<const T> coords;
  /// Jet channels, output-major: jets[o * layout->channels() + c].
  const T* jets = nullptr;
  const JetLayout* layout = nullptr;
  std::span<const T> inverse;

  const T& value(int o) const { return jets[o * layout->channels() + layout->value_channel()]; }
  const T& grad(int o, int i) const { return jets[o * layout->channels() + layout->grad_channel(i)]; }
  const T& hess(int o, int i, int j) const {
    const int c = layout->hess_channel(i, j);
    if (c < 0) throw ConfigError("ResidualArgs: Hessian channel not in layout");
    return jets[o * layout->channels() + c];
  }
};

/// A PDE residual N[u](x) as arithmetic over jet channels. `hessian_pairs`
/// declares the second-order channels the operator reads, which is what the
/// training and point-movement passes propagate.
struct ResidualOp {
  int n_outputs = 1;
  int n_components = 1;
  std::vector<std::pair<int, int>> hessian_pairs;
  std::function<void(const ResidualArgs<double>&, std::span<double>)> eval;
  std::function<void(const ResidualArgs<Dual>&, std::span<Dual>)> eval_dual;
};

/// Wraps a generic callable `f(args, out)` into both instantiations.
template <class F>
ResidualOp make_residual_op(int n_outputs, int n_components,
                            std::vector<std::pair<int, int>> hessian_pairs, F f) {
  if (n_components < 1 || n_components > 4)
    throw ConfigError("make_residual_op: 1..4 residual components supported");
  ResidualOp op;
  op.n_outputs = n_outputs;
  op.n_components = n_components;
  op.hessian_pairs = std::move(hessian_pairs);
  op.eval = [f](const ResidualArgs<double>& a, std::span<double> out) { f(a, out); };
  op.eval_dual = [f](const ResidualArgs<Dual>& a, std::span<Dual> out) { f(a, out); };
  return op;
}

}  // namespace pinn
