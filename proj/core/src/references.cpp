#include "pinn/references.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "pinn/errors.hpp"
#include "pinn/rng.hpp"
#include "src/csv_format.hpp"

namespace pinn {

using std::numbers::pi;

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(n - 1);
  for (int k = 1; k < n; ++k) sub[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    nodes[i] = solver.eigenvalues()[i];
    const double v0 = solver.eigenvectors()(0, i);
    weights[i] = 2.0 * v0 * v0;
  }
}

ColeHopfBurgers::ColeHopfBurgers(double nu, int panels, int points_per_panel) : nu_(nu) {
  // Composite rule on z in [-zmax, zmax]; beyond zmax the Gaussian factor is
  // at least e^{-45} below every attainable peak of the oscillatory factor.
  const double zmax = 13.0;
  std::vector<double> base_nodes, base_weights;
  gauss_legendre(points_per_panel, base_nodes, base_weights);
  const double width = 2.0 * zmax / panels;
  for (int panel = 0; panel < panels; ++panel) {
    const double lo = -zmax + panel * width;
    for (int k = 0; k < points_per_panel; ++k) {
      nodes_.push_back(lo + 0.5 * width * (base_nodes[k] + 1.0));
      weights_.push_back(0.5 * width * base_weights[k]);
    }
  }
}

double ColeHopfBurgers::value(double x, double t) const {
  if (t < 0.0 || std::abs(x) > 1.0 + 1e-12)
    throw std::domain_error("ColeHopfBurgers: (x, t) outside [-1,1] x [0, inf)");
  if (t == 0.0) return -std::sin(pi * x);
  const double a = 2.0 * std::sqrt(nu_ * t);
  const double c = 1.0 / (2.0 * pi * nu_);
  // One pass for the max total exponent keeps exp() in range for small nu.
  double emax = -1e300;
  const std::size_t n = nodes_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double z = nodes_[i];
    emax = std::max(emax, -std::cos(pi * (x - a * z)) * c - z * z);
  }
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = nodes_[i];
    const double y = x - a * z;
    const double f = weights_[i] * std::exp(-std::cos(pi * y) * c - z * z - emax);
    num += f * std::sin(pi * y);
    den += f;
  }
  return -num / den;
}

double reference_burgers(double x, double t) {
  static const ColeHopfBurgers ref(0.01 / pi);
  return ref.value(x, t);
}

AllenCahnTable::AllenCahnTable(double diffusion, int n_cells, double dt, int store_every)
    : diffusion_(diffusion), n_cells_(n_cells), dt_(dt), store_every_(store_every) {
  if (n_cells_ < 8 || dt_ <= 0.0 || store_every_ < 1)
    throw ConfigError("AllenCahnTable: bad grid parameters");
  integrate();
}

void AllenCahnTable::integrate() {
  const int n = n_cells_;
  const double h = 2.0 / n;
  const double inv_h2 = 1.0 / (h * h);
  const int total_steps = static_cast<int>(std::llround(1.0 / dt_));
  n_slices_ = total_steps / store_every_ + 1;
  slices_.assign(static_cast<std::size_t>(n_slices_) * (n + 1), 0.0);

  std::vector<double> u(n + 1), k1(n + 1), k2(n + 1), k3(n + 1), k4(n + 1), tmp(n + 1);
  for (int j = 0; j <= n; ++j) {
    const double x = -1.0 + j * h;
    u[j] = x * x * std::cos(pi * x);
  }
  auto rhs = [&](const std::vector<double>& v, std::vector<double>& out) {
    out[0] = 0.0;
    out[n] = 0.0;
    for (int j = 1; j < n; ++j) {
      const double lap = (v[j - 1] - 2.0 * v[j] + v[j + 1]) * inv_h2;
      out[j] = diffusion_ * lap + 5.0 * (v[j] - v[j] * v[j] * v[j]);
    }
  };
  auto store = [&](int slice) {
    std::copy(u.begin(), u.end(), slices_.begin() + static_cast<std::size_t>(slice) * (n + 1));
  };

  store(0);
  for (int step = 1; step <= total_steps; ++step) {
    rhs(u, k1);
    for (int j = 0; j <= n; ++j) tmp[j] = u[j] + 0.5 * dt_ * k1[j];
    rhs(tmp, k2);
    for (int j = 0; j <= n; ++j) tmp[j] = u[j] + 0.5 * dt_ * k2[j];
    rhs(tmp, k3);
    for (int j = 0; j <= n; ++j) tmp[j] = u[j] + dt_ * k3[j];
    rhs(tmp, k4);
    for (int j = 0; j <= n; ++j) u[j] += dt_ / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    if (step % store_every_ == 0) store(step / store_every_);
  }
}

double AllenCahnTable::value(double x, double t) const {
  if (t < 0.0 || t > 1.0 + 1e-12 || std::abs(x) > 1.0 + 1e-12)
    throw std::domain_error("AllenCahnTable: (x, t) outside [-1,1] x [0,1]");
  x = std::clamp(x, -1.0, 1.0);
  t = std::clamp(t, 0.0, 1.0);

  const double slice_dt = dt_ * store_every_;
  const double s = t / slice_dt;
  const int s0 = std::min(static_cast<int>(s), n_slices_ - 2);
  const double wt = s - s0;

  const int n = n_cells_;
  const double h = 2.0 / n;
  auto interp_x = [&](int slice) {
    const double* row = slices_.data() + static_cast<std::size_t>(slice) * (n + 1);
    const double pos = (x + 1.0) / h;
    int j0 = static_cast<int>(pos) - 1;
    j0 = std::clamp(j0, 0, n - 3);
    // 4-point Lagrange on nodes j0..j0+3
    const double r = pos - j0;
    const double c0 = -(r - 1.0) * (r - 2.0) * (r - 3.0) / 6.0;
    const double c1 = r * (r - 2.0) * (r - 3.0) / 2.0;
    const double c2 = -r * (r - 1.0) * (r - 3.0) / 2.0;
    const double c3 = r * (r - 1.0) * (r - 2.0) / 6.0;
    return c0 * row[j0] + c1 * row[j0 + 1] + c2 * row[j0 + 2] + c3 * row[j0 + 3];
  };
  const double lo = interp_x(s0);
  if (wt == 0.0) return lo;
  return lo + wt * (interp_x(s0 + 1) - lo);
}

namespace {
constexpr std::uint64_t kAllenCahnMagic = 0x50494e4e41433031ULL;  // "PINNAC01"
}

void AllenCahnTable::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("AllenCahnTable::save: cannot open " + path);
  auto put = [&](const void* p, std::size_t bytes) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(bytes));
  };
  put(&kAllenCahnMagic, 8);
  put(&diffusion_, 8);
  const std::int64_t cells = n_cells_, every = store_every_, slices = n_slices_;
  put(&cells, 8);
  put(&dt_, 8);
  put(&every, 8);
  put(&slices, 8);
  put(slices_.data(), slices_.size() * 8);
  if (!out) throw ConfigError("AllenCahnTable::save: write failed for " + path);
}

std::unique_ptr<AllenCahnTable> AllenCahnTable::load(const std::string& path, double diffusion,
                                                     int n_cells, double dt, int store_every) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return nullptr;
  auto get = [&](void* p, std::size_t bytes) {
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(bytes));
    return static_cast<bool>(in);
  };
  std::uint64_t magic = 0;
  double diff = 0.0, dt_file = 0.0;
  std::int64_t cells = 0, every = 0, slices = 0;
  if (!get(&magic, 8) || magic != kAllenCahnMagic) return nullptr;
  if (!get(&diff, 8) || !get(&cells, 8) || !get(&dt_file, 8) || !get(&every, 8) || !get(&slices, 8))
    return nullptr;
  if (diff != diffusion || cells != n_cells || dt_file != dt || every != store_every)
    return nullptr;
  std::unique_ptr<AllenCahnTable> table(new AllenCahnTable());
  table->diffusion_ = diff;
  table->n_cells_ = static_cast<int>(cells);
  table->dt_ = dt_file;
  table->store_every_ = static_cast<int>(every);
  table->n_slices_ = static_cast<int>(slices);
  table->slices_.resize(static_cast<std::size_t>(slices) * (cells + 1));
  if (!get(table->slices_.data(), table->slices_.size() * 8)) return nullptr;
  return table;
}

double reference_allen_cahn(double x, double t) {
  static const AllenCahnTable table(0.001);
  return table.value(x, t);
}

AnalyticField make_taylor_green_field(double nu) {
  return AnalyticField(3, 3, [nu](std::span<const TaylorVar> q, std::span<TaylorVar> out) {
    const TaylorVar& x = q[0];
    const TaylorVar& y = q[1];
    const TaylorVar& t = q[2];
    const TaylorVar decay = exp(t * (-2.0 * nu));
    out[0] = -cos(x) * sin(y) * decay;
    out[1] = sin(x) * cos(y) * decay;
    out[2] = (cos(x * 2.0) + cos(y * 2.0)) * (-0.25) * exp(t * (-4.0 * nu));
  });
}

void TaylorGreenReference::eval(const Point& p, std::span<double> out) const {
  const double x = p[0], y = p[1], t = p[2];
  const double decay = std::exp(-2.0 * nu_ * t);
  out[0] = -std::cos(x) * std::sin(y) * decay;
  out[1] = std::sin(x) * std::cos(y) * decay;
  out[2] = -0.25 * (std::cos(2.0 * x) + std::cos(2.0 * y)) * decay * decay;
}

ObservationSet gen_taylor_green(double nu, int n_rows, std::uint64_t seed) {
  Rng rng = Rng::derive(seed, "taylor-green");
  const TaylorGreenReference field(nu);
  ObservationSet obs;
  obs.rows.resize(n_rows);
  for (int i = 0; i < n_rows; ++i) {
    const double x = rng.uniform(1.0, 8.0);
    const double y = rng.uniform(-2.0, 2.0);
    const double t = rng.uniform(0.0, 7.0);
    double uvp[3];
    field.eval({x, y, t}, uvp);
    obs.rows[i] = {t, x, y, uvp[0], uvp[1], uvp[2]};
  }
  return obs;
}

void save_observations_csv(const std::string& path, const ObservationSet& obs) {
  std::ofstream out(path);
  if (!out) throw ConfigError("save_observations_csv: cannot open " + path);
  out << "t,x,y,u,v,p\n";
  char buf[32];
  for (const auto& row : obs.rows) {
    for (int c = 0; c < 6; ++c) {
      format_g17(row[c], buf);
      out << (c ? "," : "") << buf;
    }
    out << '\n';
  }
  if (!out) throw ConfigError("save_observations_csv: write failed for " + path);
}

ObservationSet load_observations_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("load_observations_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != "t,x,y,u,v,p")
    throw ConfigError("load_observations_csv: bad header in " + path);
  ObservationSet obs;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::array<double, 6> row{};
    const char* s = line.c_str();
    char* end = nullptr;
    for (int c = 0; c < 6; ++c) {
      row[c] = std::strtod(s, &end);
      if (end == s) throw ConfigError("load_observations_csv: malformed row in " + path);
      s = (*end == ',') ? end + 1 : end;
    }
    const double t = row[0], x = row[1], y = row[2];
    if (x < 1.0 || x > 8.0 || y < -2.0 || y > 2.0 || t < 0.0 || t > 7.0)
      throw ConfigError("load_observations_csv: observation outside the domain box");
    obs.rows.push_back(row);
  }
  return obs;
}

}  // namespace pinn
