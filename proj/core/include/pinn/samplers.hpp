#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pinn/point.hpp"
#include "pinn/rng.hpp"

namespace pinn {

enum class PointOrigin : std::uint8_t { initial, added, replaced };

const char* to_string(PointOrigin origin);

/// The mutable set of interior collocation points a training run owns.
struct CollocationSet {
  std::vector<Point> points;
  std::vector<PointOrigin> origins;

  std::size_t size() const { return points.size(); }
  void append(Point p, PointOrigin origin) {
    points.push_back(std::move(p));
    origins.push_back(origin);
  }
  /// Containment in the closed box plus count >= 1.
  void validate(const DomainBox& box) const;
};

enum class SamplerKind : std::uint8_t {
  uniform_grid,
  hammersley,
  random_resample,
  rar,
  rad,
  rar_d,
  pacmann,
};

SamplerKind sampler_kind_from_string(const std::string& name);
const char* to_string(SamplerKind kind);
/// Static kinds are sampled once and never mutated during training.
bool sampler_is_static(SamplerKind kind);

/// Settings for the baseline adaptive strategies.
struct BaselineSamplerConfig {
  SamplerKind kind = SamplerKind::hammersley;
  int period = 50;      // resampling period P in iterations
  int rar_add = 1;      // points appended per RAR / RAR-D event
  double rad_k = 1.0;   // residual exponent of the RAD density
  double rad_c = 1.0;   // uniform offset of the RAD density
  int pool_size = 0;    // candidate pool per event; 0 means 10 * n_r

  int effective_pool(int n_r) const { return pool_size > 0 ? pool_size : 10 * n_r; }
  void validate(int n_r) const;
};

/// Per-axis counts of the largest tensor grid with at most n points,
/// most balanced among those; non-increasing order.
std::vector<int> balanced_grid_counts(int n, int dim);

/// Equispaced tensor-product grid including the box faces. The actual count
/// is the largest balanced product <= n.
CollocationSet uniform_grid(int n, const DomainBox& box);

/// Hammersley set: first coordinate i/n, later coordinates the radical
/// inverse of i in consecutive prime bases, affinely mapped to the box.
CollocationSet hammersley(int n, const DomainBox& box);

/// Van der Corput radical inverse of i in the given base.
double radical_inverse(std::uint64_t i, int base);

/// n i.i.d. uniform points; deterministic in the seed.
CollocationSet resample_random(int n, const DomainBox& box, std::uint64_t seed);

/// Appends the m pool points with the largest residual magnitude; ties break
/// toward the lowest pool index.
CollocationSet rar_step(CollocationSet set, std::span<const Point> pool,
                        std::span<const double> residual_magnitude, int m);

/// Indices of n pool points drawn without replacement with probabilities
/// proportional to |r|^k / mean(|r|^k) + c, by exponentially-keyed ordering.
/// The order of the result is the draw order.
std::vector<std::size_t> rad_select(int n, std::span<const double> residual_magnitude, double k,
                                    double c, std::uint64_t seed);

/// Full resample of n points from the pool via the RAD distribution.
CollocationSet rad_resample(int n, std::span<const Point> pool,
                            std::span<const double> residual_magnitude, double k, double c,
                            std::uint64_t seed);

/// Appends m pool points drawn via the RAD distribution.
CollocationSet rard_step(CollocationSet set, std::span<const Point> pool,
                         std::span<const double> residual_magnitude, int m, double k, double c,
                         std::uint64_t seed);

/// Point-cloud snapshot CSV: `iteration,point_id,origin,c0,c1[,c2...]`.
void write_point_cloud_csv(const std::string& path, long iteration, const CollocationSet& set);
CollocationSet read_point_cloud_csv(const std::string& path, long* iteration = nullptr);

}  // namespace pinn
