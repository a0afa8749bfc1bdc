#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pinn/field.hpp"
#include "pinn/point.hpp"

namespace pinn {

/// Ground-truth solution handle used for test-error evaluation.
class ReferenceSolution {
 public:
  virtual ~ReferenceSolution() = default;
  virtual int output_dim() const = 0;
  virtual void eval(const Point& p, std::span<double> out) const = 0;
};

/// Gauss-Legendre nodes and weights on [-1, 1], computed by the
/// Golub-Welsch eigenvalue method.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// Burgers reference: Cole-Hopf closed-form quotient of heat-kernel
/// integrals. The integrals are taken in the Gaussian-scaled variable with a
/// composite Gauss-Legendre rule; for small viscosity the integrand develops
/// secondary peaks spanning ~40 orders of magnitude, which a plain Hermite
/// rule cannot resolve to the accuracy required here.
class ColeHopfBurgers final : public ReferenceSolution {
 public:
  explicit ColeHopfBurgers(double nu, int panels = 160, int points_per_panel = 10);

  int output_dim() const override { return 1; }
  void eval(const Point& p, std::span<double> out) const override { out[0] = value(p[0], p[1]); }

  /// Throws std::domain_error for t < 0 or |x| > 1.
  double value(double x, double t) const;

 private:
  double nu_;
  std::vector<double> nodes_;    // scaled-variable quadrature nodes
  std::vector<double> weights_;  // matching weights (log weight folded in later)
};

double reference_burgers(double x, double t);

/// Allen-Cahn reference: method-of-lines table. Second-order central
/// differences in space, classic RK4 in time, Dirichlet ends pinned at -1.
/// Queries interpolate cubically in x and linearly in t.
class AllenCahnTable final : public ReferenceSolution {
 public:
  AllenCahnTable(double diffusion, int n_cells = 512, double dt = 1e-4, int store_every = 10);

  int output_dim() const override { return 1; }
  void eval(const Point& p, std::span<double> out) const override { out[0] = value(p[0], p[1]); }
  double value(double x, double t) const;

  int n_cells() const { return n_cells_; }

  /// Binary cache round trip; load() returns nullptr on any mismatch.
  void save(const std::string& path) const;
  static std::unique_ptr<AllenCahnTable> load(const std::string& path, double diffusion,
                                              int n_cells, double dt, int store_every);

 private:
  AllenCahnTable() = default;
  void integrate();

  double diffusion_ = 0.0;
  int n_cells_ = 0;
  double dt_ = 0.0;
  int store_every_ = 0;
  int n_slices_ = 0;
  std::vector<double> slices_;  // n_slices x (n_cells + 1)
};

double reference_allen_cahn(double x, double t);

/// Taylor-Green vortex on [1,8] x [-2,2] x [0,7]: satisfies the
/// incompressible momentum equations exactly with lambda1 = 1, lambda2 = nu.
AnalyticField make_taylor_green_field(double nu);

class TaylorGreenReference final : public ReferenceSolution {
 public:
  explicit TaylorGreenReference(double nu) : nu_(nu) {}
  int output_dim() const override { return 3; }
  void eval(const Point& p, std::span<double> out) const override;

 private:
  double nu_;
};

/// Rows of (t, x, y, u, v, p) observations for the inverse problem.
struct ObservationSet {
  std::vector<std::array<double, 6>> rows;
};

ObservationSet gen_taylor_green(double nu, int n_rows, std::uint64_t seed);

/// CSV with header `t,x,y,u,v,p`, 17-significant-digit values.
void save_observations_csv(const std::string& path, const ObservationSet& obs);
ObservationSet load_observations_csv(const std::string& path);

}  // namespace pinn
