#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "pinn/errors.hpp"

namespace pinn {

/// One domain point. Coordinates are in problem units; when a problem has a
/// time coordinate it is the last entry.
using Point = std::vector<double>;

inline bool all_finite(const Point& p) {
  for (double c : p)
    if (!std::isfinite(c)) return false;
  return true;
}

/// Axis-aligned box: the spatial domain, or space x time for evolution
/// problems.
struct DomainBox {
  std::vector<double> lower;
  std::vector<double> upper;

  int dim() const { return static_cast<int>(lower.size()); }

  /// Membership in the closed box.
  bool contains(const Point& p) const {
    if (p.size() != lower.size()) return false;
    for (std::size_t i = 0; i < p.size(); ++i)
      if (p[i] < lower[i] || p[i] > upper[i]) return false;
    return true;
  }

  double extent(int axis) const { return upper[axis] - lower[axis]; }

  void validate() const {
    if (lower.empty() || lower.size() != upper.size())
      throw ConfigError("DomainBox: lower/upper size mismatch");
    for (std::size_t i = 0; i < lower.size(); ++i)
      if (!(lower[i] < upper[i]))
        throw ConfigError("DomainBox: lower must be < upper on every axis");
  }
};

}  // namespace pinn
