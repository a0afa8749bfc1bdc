#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "pinn/mlp.hpp"

namespace pinn::detail {

// Batched propagation of derivative jets through the MLP. The state after
// every layer is a (width x K*B) matrix: B points, each occupying K adjacent
// columns, one per jet channel of the layout. Affine layers act on the state
// by one matrix product; tanh layers mix the channels of each point through
// the chain rule, using derivatives of tanh up to the layout order.
//
// reverse() accumulates d(scalar)/d(theta) for a scalar whose adjoint with
// respect to the output jets is supplied; it supports layouts up to second
// order (third-order passes are forward-only).
class MlpJetEngine {
 public:
  MlpJetEngine(MLPConfig cfg, JetLayout layout);

  void forward(const ParameterVector& theta, std::span<const Point> points);

  const JetLayout& jet_layout() const { return layout_; }
  int n_points() const { return n_points_; }
  /// (output_dim) x (K*B) jet channels of the network outputs.
  const Eigen::MatrixXd& output() const { return out_; }

  void extract(JetBatch& out) const;

  /// Given the adjoint of output() (same shape), accumulates the parameter
  /// gradient into `grad` (length >= net_param_count). Requires the states of
  /// the preceding forward() call.
  void reverse(const ParameterVector& theta, const Eigen::MatrixXd& out_adjoint,
               std::span<double> grad);

 private:
  struct Order2Recipe {
    int ch, gi, gj;
  };
  struct Order3Recipe {
    int ch;
    int pair_ch[3];
    int partner_ch[3];
    int gi, gj, gk;
  };

  void apply_tanh(const Eigen::MatrixXd& pre, Eigen::MatrixXd& post) const;
  void reverse_tanh(const Eigen::MatrixXd& pre, const Eigen::MatrixXd& post,
                    const Eigen::MatrixXd& post_adjoint, Eigen::MatrixXd& pre_adjoint) const;

  MLPConfig cfg_;
  JetLayout layout_;
  std::vector<int> widths_;       // input_dim, hidden..., output_dim
  std::vector<int> weight_off_;   // per affine layer
  std::vector<int> bias_off_;
  std::vector<Order2Recipe> order2_;
  std::vector<Order3Recipe> order3_;

  int n_points_ = 0;
  Eigen::MatrixXd input_;
  std::vector<Eigen::MatrixXd> pre_;   // per hidden layer
  std::vector<Eigen::MatrixXd> post_;  // per hidden layer
  Eigen::MatrixXd out_;
  mutable Eigen::ArrayXXd scratch_t_, scratch_f1_, scratch_f2_, scratch_f3_;
  // aligned copies of the theta weight blocks (see forward())
  std::vector<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> w_cache_;
  std::vector<Eigen::VectorXd> bias_cache_;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> wg_tmp_;
  Eigen::VectorXd bg_tmp_;
};

}  // namespace pinn::detail
