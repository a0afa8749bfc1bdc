#include "pinn/samplers.hpp"

#include "src/csv_format.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace pinn {

const char* to_string(PointOrigin origin) {
  switch (origin) {
    case PointOrigin::initial: return "initial";
    case PointOrigin::added: return "added";
    case PointOrigin::replaced: return "replaced";
  }
  return "?";
}

void CollocationSet::validate(const DomainBox& box) const {
  if (points.empty()) throw ConfigError("CollocationSet: at least one point required");
  if (points.size() != origins.size()) throw ConfigError("CollocationSet: origin tags out of sync");
  for (const Point& p : points)
    if (!box.contains(p)) throw ConfigError("CollocationSet: point outside the domain box");
}

SamplerKind sampler_kind_from_string(const std::string& name) {
  if (name == "uniform_grid") return SamplerKind::uniform_grid;
  if (name == "hammersley") return SamplerKind::hammersley;
  if (name == "random_resample") return SamplerKind::random_resample;
  if (name == "rar") return SamplerKind::rar;
  if (name == "rad") return SamplerKind::rad;
  if (name == "rar_d") return SamplerKind::rar_d;
  if (name == "pacmann") return SamplerKind::pacmann;
  throw ConfigError("unknown sampler kind: " + name);
}

const char* to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::uniform_grid: return "uniform_grid";
    case SamplerKind::hammersley: return "hammersley";
    case SamplerKind::random_resample: return "random_resample";
    case SamplerKind::rar: return "rar";
    case SamplerKind::rad: return "rad";
    case SamplerKind::rar_d: return "rar_d";
    case SamplerKind::pacmann: return "pacmann";
  }
  return "?";
}

bool sampler_is_static(SamplerKind kind) {
  return kind == SamplerKind::uniform_grid || kind == SamplerKind::hammersley;
}

void BaselineSamplerConfig::validate(int n_r) const {
  if (period < 1) throw ConfigError("sampler: period must be >= 1");
  if (rar_add < 1) throw ConfigError("sampler: rar_add must be >= 1");
  if (pool_size != 0 && pool_size < 10 * n_r)
    throw ConfigError("sampler: pool_size must be >= 10 * n_r");
}

namespace {

// Near-balanced per-axis counts (max - min <= 1) with the largest product
// that stays at or below n; a degenerate n x 1 "grid" is never produced, so
// the realized count can fall below n (e.g. prime n).
std::vector<int> near_balanced_counts(int n, int dim) {
  int k = static_cast<int>(std::floor(std::pow(static_cast<double>(n), 1.0 / dim)));
  while (std::pow(static_cast<double>(k + 1), dim) <= static_cast<double>(n)) ++k;
  std::vector<int> counts(dim, std::max(k, 1));
  for (int axis = 0; axis < dim; ++axis) {
    long product = 1;
    for (int c : counts) product *= c;
    if (product / counts[axis] * (counts[axis] + 1) <= n) ++counts[axis];
  }
  std::sort(counts.begin(), counts.end(), std::greater<>());
  return counts;
}

constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19};

}  // namespace

std::vector<int> balanced_grid_counts(int n, int dim) {
  if (n < 1 || dim < 1) throw ConfigError("balanced_grid_counts: n and dim must be positive");
  return near_balanced_counts(n, dim);
}

CollocationSet uniform_grid(int n, const DomainBox& box) {
  const int d = box.dim();
  const std::vector<int> counts = balanced_grid_counts(n, d);
  CollocationSet set;
  std::vector<int> index(d, 0);
  for (;;) {
    Point p(d);
    for (int axis = 0; axis < d; ++axis) {
      const int c = counts[axis];
      p[axis] = c == 1 ? 0.5 * (box.lower[axis] + box.upper[axis])
                       : box.lower[axis] + box.extent(axis) * index[axis] / (c - 1);
    }
    set.append(std::move(p), PointOrigin::initial);
    int axis = d - 1;
    while (axis >= 0 && ++index[axis] == counts[axis]) index[axis--] = 0;
    if (axis < 0) break;
  }
  return set;
}

double radical_inverse(std::uint64_t i, int base) {
  double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (i != 0) {
    r += static_cast<double>(i % base) * f;
    i /= base;
    f *= inv;
  }
  return r;
}

CollocationSet hammersley(int n, const DomainBox& box) {
  const int d = box.dim();
  if (d - 1 > static_cast<int>(std::size(kPrimes)))
    throw ConfigError("hammersley: dimension too large");
  CollocationSet set;
  for (int i = 0; i < n; ++i) {
    Point p(d);
    p[0] = box.lower[0] + box.extent(0) * i / n;
    for (int axis = 1; axis < d; ++axis)
      p[axis] = box.lower[axis] + box.extent(axis) * radical_inverse(i, kPrimes[axis - 1]);
    set.append(std::move(p), PointOrigin::initial);
  }
  return set;
}

CollocationSet resample_random(int n, const DomainBox& box, std::uint64_t seed) {
  Rng rng = Rng::derive(seed, "resample-random");
  CollocationSet set;
  for (int i = 0; i < n; ++i) set.append(rng.uniform_in(box), PointOrigin::replaced);
  return set;
}

CollocationSet rar_step(CollocationSet set, std::span<const Point> pool,
                        std::span<const double> residual_magnitude, int m) {
  if (pool.size() != residual_magnitude.size())
    throw ConfigError("rar_step: pool and residual sizes differ");
  if (m == 0) return set;
  if (m < 0 || static_cast<std::size_t>(m) > pool.size())
    throw ConfigError("rar_step: m out of range");
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + m, order.end(), [&](std::size_t a, std::size_t b) {
    const double ra = std::abs(residual_magnitude[a]), rb = std::abs(residual_magnitude[b]);
    if (ra != rb) return ra > rb;
    return a < b;
  });
  for (int i = 0; i < m; ++i) set.append(pool[order[i]], PointOrigin::added);
  return set;
}

std::vector<std::size_t> rad_select(int n, std::span<const double> residual_magnitude, double k,
                                    double c, std::uint64_t seed) {
  const std::size_t pool = residual_magnitude.size();
  if (n < 0 || static_cast<std::size_t>(n) > pool)
    throw ConfigError("rad_select: pool smaller than the requested draw");

  double mean_rk = 0.0;
  std::vector<double> rk(pool);
  for (std::size_t i = 0; i < pool; ++i) {
    rk[i] = std::pow(std::abs(residual_magnitude[i]), k);
    mean_rk += rk[i];
  }
  mean_rk /= static_cast<double>(pool);

  std::vector<double> weight(pool);
  bool all_zero = true;
  for (std::size_t i = 0; i < pool; ++i) {
    weight[i] = (mean_rk > 0.0 ? rk[i] / mean_rk : 0.0) + c;
    if (weight[i] > 0.0) all_zero = false;
  }
  if (all_zero) weight.assign(pool, 1.0);

  // Exponentially-keyed order: key_i = Exp(1)/w_i; the n smallest keys are an
  // exact weighted sample without replacement, in draw order.
  Rng rng = Rng::derive(seed, "rad-select");
  std::vector<double> key(pool);
  for (std::size_t i = 0; i < pool; ++i) {
    const double u = rng.uniform();
    const double e = -std::log1p(-u);  // Exp(1)
    key[i] = weight[i] > 0.0 ? e / weight[i] : std::numeric_limits<double>::infinity();
  }
  std::vector<std::size_t> order(pool);
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + n, order.end(), [&](std::size_t a, std::size_t b) {
    if (key[a] != key[b]) return key[a] < key[b];
    return a < b;
  });
  order.resize(n);
  return order;
}

CollocationSet rad_resample(int n, std::span<const Point> pool,
                            std::span<const double> residual_magnitude, double k, double c,
                            std::uint64_t seed) {
  if (pool.size() != residual_magnitude.size())
    throw ConfigError("rad_resample: pool and residual sizes differ");
  if (static_cast<std::size_t>(n) > pool.size())
    throw ConfigError("rad_resample: pool smaller than the requested set");
  CollocationSet set;
  for (std::size_t i : rad_select(n, residual_magnitude, k, c, seed))
    set.append(pool[i], PointOrigin::replaced);
  return set;
}

CollocationSet rard_step(CollocationSet set, std::span<const Point> pool,
                         std::span<const double> residual_magnitude, int m, double k, double c,
                         std::uint64_t seed) {
  if (pool.size() != residual_magnitude.size())
    throw ConfigError("rard_step: pool and residual sizes differ");
  for (std::size_t i : rad_select(m, residual_magnitude, k, c, seed))
    set.append(pool[i], PointOrigin::added);
  return set;
}

void write_point_cloud_csv(const std::string& path, long iteration, const CollocationSet& set) {
  std::ofstream out(path);
  if (!out) throw ConfigError("write_point_cloud_csv: cannot open " + path);
  const int d = set.points.empty() ? 0 : static_cast<int>(set.points.front().size());
  out << "iteration,point_id,origin";
  for (int c = 0; c < d; ++c) out << ",c" << c;
  out << '\n';
  char buf[32];
  for (std::size_t i = 0; i < set.size(); ++i) {
    out << iteration << ',' << i << ',' << to_string(set.origins[i]);
    for (double v : set.points[i]) {
      format_g17(v, buf);
      out << ',' << buf;
    }
    out << '\n';
  }
  if (!out) throw ConfigError("write_point_cloud_csv: write failed for " + path);
}

CollocationSet read_point_cloud_csv(const std::string& path, long* iteration) {
  std::ifstream in(path);
  if (!in) throw ConfigError("read_point_cloud_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("iteration,point_id,origin", 0) != 0)
    throw ConfigError("read_point_cloud_csv: bad header in " + path);
  CollocationSet set;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::getline(ls, cell, ',');
    if (iteration) *iteration = std::stol(cell);
    std::getline(ls, cell, ',');  // point_id
    std::getline(ls, cell, ',');
    PointOrigin origin = PointOrigin::initial;
    if (cell == "added") origin = PointOrigin::added;
    else if (cell == "replaced") origin = PointOrigin::replaced;
    else if (cell != "initial") throw ConfigError("read_point_cloud_csv: bad origin " + cell);
    Point p;
    while (std::getline(ls, cell, ',')) p.push_back(std::stod(cell));
    set.append(std::move(p), origin);
  }
  return set;
}

}  // namespace pinn
