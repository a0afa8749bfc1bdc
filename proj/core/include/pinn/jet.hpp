#pragma once

#include <array>
#include <utility>
#include <vector>

#include "pinn/errors.hpp"

namespace pinn {

/// One partial-derivative channel: a sorted multi-index of input directions.
/// Order 0 is the field value itself, order 1 a gradient entry, order 2 a
/// Hessian entry, order 3 a third mixed partial.
struct JetChannel {
  int order = 0;
  std::array<int, 3> idx{-1, -1, -1};

  bool operator==(const JetChannel&) const = default;
};

/// The set of derivative channels carried through a network evaluation.
/// Layouts may be full (every mixed partial up to `order`) or masked, keeping
/// only the second/third-order channels a residual operator actually reads.
/// Whenever order >= 1 all first-order channels are present, so any masked
/// layout is closed under the chain rules used by the propagation engine.
class JetLayout {
 public:
  JetLayout() = default;

  static JetLayout value_only(int dim);
  static JetLayout first_order(int dim);
  /// Full Hessian.
  static JetLayout second_order(int dim);
  /// Hessian restricted to the given (i, j) pairs.
  static JetLayout second_order(int dim, const std::vector<std::pair<int, int>>& pairs);
  /// Every mixed partial up to order three.
  static JetLayout third_order(int dim);

  /// Layout able to represent d/dx_m of every channel in this layout, for
  /// every direction m, alongside the original channels. This is what an
  /// input-gradient pass over an expression of these channels needs.
  JetLayout gradient_closure() const;

  int dim() const { return dim_; }
  int order() const { return order_; }
  int channels() const { return static_cast<int>(entries_.size()); }

  int value_channel() const { return 0; }
  int grad_channel(int i) const { return grad_idx_[i]; }
  /// -1 when the pair is masked out.
  int hess_channel(int i, int j) const { return hess_idx_[i * dim_ + j]; }
  int third_channel(int i, int j, int k) const;

  /// Channel holding d(entry c)/dx_m; -1 when not representable here.
  int derivative_channel(int c, int m) const;

  const std::vector<JetChannel>& entries() const { return entries_; }

  bool operator==(const JetLayout& other) const { return entries_ == other.entries_ && dim_ == other.dim_; }

 private:
  void index_channels();

  int dim_ = 0;
  int order_ = 0;
  std::vector<JetChannel> entries_;
  std::vector<int> grad_idx_;
  std::vector<int> hess_idx_;   // dim x dim
  std::vector<int> third_idx_;  // dim x dim x dim
};

/// Value, input gradient, and input Hessian of one field output at one point.
struct Jet2 {
  double value = 0.0;
  std::vector<double> grad;  // d entries
  std::vector<double> hess;  // d*d row-major, symmetric

  int dim() const { return static_cast<int>(grad.size()); }
  double hess_at(int i, int j) const { return hess[static_cast<std::size_t>(i) * grad.size() + j]; }
};

/// Dense per-(point, output) channel storage for a batch of jets.
class JetBatch {
 public:
  JetBatch() = default;
  JetBatch(JetLayout layout, int n_points, int n_outputs)
      : layout_(std::move(layout)),
        n_points_(n_points),
        n_outputs_(n_outputs),
        data_(static_cast<std::size_t>(n_points) * n_outputs * layout_.channels(), 0.0) {}

  const JetLayout& layout() const { return layout_; }
  int n_points() const { return n_points_; }
  int n_outputs() const { return n_outputs_; }

  double* channels(int point, int output) {
    return data_.data() + (static_cast<std::size_t>(point) * n_outputs_ + output) * layout_.channels();
  }
  const double* channels(int point, int output) const {
    return data_.data() + (static_cast<std::size_t>(point) * n_outputs_ + output) * layout_.channels();
  }

  double value(int p, int o) const { return channels(p, o)[layout_.value_channel()]; }
  double grad(int p, int o, int i) const { return channels(p, o)[layout_.grad_channel(i)]; }
  double hess(int p, int o, int i, int j) const;

  /// Requires a layout with the full Hessian present.
  Jet2 to_jet2(int point, int output) const;

 private:
  JetLayout layout_;
  int n_points_ = 0;
  int n_outputs_ = 0;
  std::vector<double> data_;
};

}  // namespace pinn
