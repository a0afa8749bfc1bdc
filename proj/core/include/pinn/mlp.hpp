#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pinn/field.hpp"

namespace pinn {

/// Fully-connected tanh network. The activation is fixed; the final layer is
/// linear.
struct MLPConfig {
  int input_dim = 1;
  int output_dim = 1;
  std::vector<int> hidden;
  /// Trailing inverse-problem scalars appended to the ParameterVector and
  /// trained jointly with the weights.
  int n_inverse = 0;

  /// Weights + biases, excluding the inverse tail.
  int net_param_count() const;
  /// Full ParameterVector length.
  int param_count() const { return net_param_count() + n_inverse; }

  void validate() const;

  bool operator==(const MLPConfig&) const = default;
};

/// Glorot-uniform weights, zero biases, zero inverse scalars. Deterministic
/// in the seed.
ParameterVector init_glorot(const MLPConfig& cfg, std::uint64_t seed);

std::vector<double> mlp_forward(const MLPConfig& cfg, const ParameterVector& theta, const Point& p);
std::vector<Jet2> mlp_forward_jet2(const MLPConfig& cfg, const ParameterVector& theta, const Point& p);

double inverse_scalar(const MLPConfig& cfg, const ParameterVector& theta, int k);

/// Checkpoint: one ASCII header line
///   mlp <input_dim> <output_dim> <hidden widths...> <n_inverse>
/// followed by the raw little-endian 64-bit parameter array.
void save_checkpoint(const std::string& path, const MLPConfig& cfg, const ParameterVector& theta);
std::pair<MLPConfig, ParameterVector> load_checkpoint(const std::string& path);

/// DifferentiableField view of the MLP.
class MLPField final : public DifferentiableField {
 public:
  explicit MLPField(MLPConfig cfg);

  const MLPConfig& config() const { return cfg_; }
  int input_dim() const override { return cfg_.input_dim; }
  int output_dim() const override { return cfg_.output_dim; }
  int param_count() const override { return cfg_.param_count(); }

  void eval_jets(const JetLayout& layout, std::span<const Point> points,
                 const ParameterVector& theta, JetBatch& out) const override;

 private:
  MLPConfig cfg_;
};

}  // namespace pinn
