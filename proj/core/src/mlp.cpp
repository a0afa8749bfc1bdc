#include "pinn/mlp.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "pinn/rng.hpp"
#include "src/mlp_jets.hpp"

namespace pinn {

int MLPConfig::net_param_count() const {
  int count = 0;
  int prev = input_dim;
  for (int w : hidden) {
    count += prev * w + w;
    prev = w;
  }
  count += prev * output_dim + output_dim;
  return count;
}

void MLPConfig::validate() const {
  if (input_dim < 1 || output_dim < 1) throw ConfigError("MLPConfig: dimensions must be positive");
  for (int w : hidden)
    if (w < 1) throw ConfigError("MLPConfig: hidden widths must be >= 1");
  if (n_inverse < 0) throw ConfigError("MLPConfig: n_inverse must be >= 0");
}

ParameterVector init_glorot(const MLPConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng = Rng::derive(seed, "glorot");
  ParameterVector theta(cfg.param_count(), 0.0);
  std::size_t pos = 0;
  int prev = cfg.input_dim;
  std::vector<int> widths = cfg.hidden;
  widths.push_back(cfg.output_dim);
  for (int w : widths) {
    const double a = std::sqrt(6.0 / (prev + w));
    for (int i = 0; i < prev * w; ++i) theta[pos++] = rng.uniform(-a, a);
    pos += w;  // biases stay zero
    prev = w;
  }
  // inverse scalars stay zero
  return theta;
}

double inverse_scalar(const MLPConfig& cfg, const ParameterVector& theta, int k) {
  if (k < 0 || k >= cfg.n_inverse) throw ConfigError("inverse_scalar: index out of range");
  return theta[cfg.net_param_count() + k];
}

std::vector<double> mlp_forward(const MLPConfig& cfg, const ParameterVector& theta, const Point& p) {
  MLPField field(cfg);
  JetBatch batch;
  const Point pts[1] = {p};
  field.eval_jets(JetLayout::value_only(cfg.input_dim), std::span<const Point>(pts, 1), theta, batch);
  std::vector<double> out(cfg.output_dim);
  for (int o = 0; o < cfg.output_dim; ++o) out[o] = batch.value(0, o);
  return out;
}

std::vector<Jet2> mlp_forward_jet2(const MLPConfig& cfg, const ParameterVector& theta, const Point& p) {
  MLPField field(cfg);
  JetBatch batch;
  const Point pts[1] = {p};
  field.eval_jets(JetLayout::second_order(cfg.input_dim), std::span<const Point>(pts, 1), theta, batch);
  std::vector<Jet2> out(cfg.output_dim);
  for (int o = 0; o < cfg.output_dim; ++o) out[o] = batch.to_jet2(0, o);
  return out;
}

void save_checkpoint(const std::string& path, const MLPConfig& cfg, const ParameterVector& theta) {
  if (static_cast<int>(theta.size()) != cfg.param_count())
    throw ConfigError("save_checkpoint: parameter count mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("save_checkpoint: cannot open " + path);
  out << "mlp " << cfg.input_dim << ' ' << cfg.output_dim;
  for (int w : cfg.hidden) out << ' ' << w;
  out << ' ' << cfg.n_inverse << '\n';
  out.write(reinterpret_cast<const char*>(theta.data()),
            static_cast<std::streamsize>(theta.size() * sizeof(double)));
  if (!out) throw ConfigError("save_checkpoint: write failed for " + path);
}

std::pair<MLPConfig, ParameterVector> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("load_checkpoint: cannot open " + path);
  std::string header;
  std::getline(in, header);
  std::istringstream hs(header);
  std::string tag;
  hs >> tag;
  if (tag != "mlp") throw ConfigError("load_checkpoint: bad header in " + path);
  std::vector<int> fields;
  for (int v; hs >> v;) fields.push_back(v);
  if (fields.size() < 3) throw ConfigError("load_checkpoint: truncated header in " + path);
  MLPConfig cfg;
  cfg.input_dim = fields.front();
  cfg.output_dim = fields[1];
  cfg.hidden.assign(fields.begin() + 2, fields.end() - 1);
  cfg.n_inverse = fields.back();
  cfg.validate();
  ParameterVector theta(cfg.param_count());
  in.read(reinterpret_cast<char*>(theta.data()),
          static_cast<std::streamsize>(theta.size() * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(theta.size() * sizeof(double)))
    throw ConfigError("load_checkpoint: truncated payload in " + path);
  return {cfg, theta};
}

MLPField::MLPField(MLPConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

void MLPField::eval_jets(const JetLayout& layout, std::span<const Point> points,
                         const ParameterVector& theta, JetBatch& out) const {
  detail::MlpJetEngine engine(cfg_, layout);
  engine.forward(theta, points);
  engine.extract(out);
}

}  // namespace pinn
