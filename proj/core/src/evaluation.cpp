#include "pinn/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "pinn/samplers.hpp"
#include "src/csv_format.hpp"
#include "src/mlp_jets.hpp"

namespace pinn {

double l2_relative_error(std::span<const double> u_true, std::span<const double> u_pred) {
  if (u_true.size() != u_pred.size())
    throw ConfigError("l2_relative_error: length mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < u_true.size(); ++i) {
    const double d = u_true[i] - u_pred[i];
    num += d * d;
    den += u_true[i] * u_true[i];
  }
  if (den == 0.0) throw std::domain_error("l2_relative_error: zero true norm");
  return std::sqrt(num / den);
}

std::vector<Point> eval_grid(const PDEProblem& problem, int target_points) {
  if (problem.input_dim <= 3) return uniform_grid(target_points, problem.box).points;
  return hammersley(target_points, problem.box).points;
}

namespace {

constexpr std::uint64_t kTruthMagic = 0x50494e4e54423031ULL;  // "PINNTB01"

std::vector<double> compute_truth(const PDEProblem& problem, const std::vector<Point>& grid) {
  const int n_out = problem.output_dim;
  std::vector<double> truth(grid.size() * static_cast<std::size_t>(n_out));
  for (std::size_t i = 0; i < grid.size(); ++i)
    problem.reference->eval(grid[i], std::span<double>(truth.data() + i * n_out, n_out));
  return truth;
}

bool load_truth_file(const std::string& path, const std::string& name, std::size_t expected,
                     std::vector<double>& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::uint64_t magic = 0, name_len = 0, count = 0;
  in.read(reinterpret_cast<char*>(&magic), 8);
  if (!in || magic != kTruthMagic) return false;
  in.read(reinterpret_cast<char*>(&name_len), 8);
  std::string file_name(name_len, ' ');
  in.read(file_name.data(), static_cast<std::streamsize>(name_len));
  in.read(reinterpret_cast<char*>(&count), 8);
  if (!in || file_name != name || count != expected) return false;
  out.resize(count);
  in.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(count * 8));
  return static_cast<bool>(in);
}

void save_truth_file(const std::string& path, const std::string& name,
                     const std::vector<double>& truth) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("save_reference_table: cannot open " + path);
  const std::uint64_t name_len = name.size(), count = truth.size();
  out.write(reinterpret_cast<const char*>(&kTruthMagic), 8);
  out.write(reinterpret_cast<const char*>(&name_len), 8);
  out.write(name.data(), static_cast<std::streamsize>(name.size()));
  out.write(reinterpret_cast<const char*>(&count), 8);
  out.write(reinterpret_cast<const char*>(truth.data()), static_cast<std::streamsize>(count * 8));
  if (!out) throw ConfigError("save_reference_table: write failed for " + path);
}

// Reference tables are immutable per (problem, grid); runs in one process
// share them instead of re-evaluating the oracle per run.
std::mutex truth_mutex;
std::map<std::string, std::shared_ptr<const std::vector<double>>> truth_memo;

std::shared_ptr<const std::vector<double>> shared_truth(const PDEProblem& problem,
                                                        const std::vector<Point>& grid,
                                                        const std::string& cache_dir) {
  const std::string key = problem.name + ":" + std::to_string(grid.size());
  std::lock_guard<std::mutex> lock(truth_mutex);
  auto it = truth_memo.find(key);
  if (it != truth_memo.end()) return it->second;

  std::vector<double> truth;
  bool loaded = false;
  const std::size_t expected = grid.size() * static_cast<std::size_t>(problem.output_dim);
  if (!cache_dir.empty()) {
    const std::string path =
        reference_table_path(cache_dir, problem.name, static_cast<int>(grid.size()));
    loaded = load_truth_file(path, problem.name, expected, truth);
  }
  if (!loaded) truth = compute_truth(problem, grid);
  auto shared = std::make_shared<const std::vector<double>>(std::move(truth));
  truth_memo.emplace(key, shared);
  return shared;
}

}  // namespace

std::string reference_table_path(const std::string& cache_dir, const std::string& problem,
                                 int n_points) {
  return cache_dir + "/" + problem + "_truth_" + std::to_string(n_points) + ".bin";
}

std::vector<double> reference_table(const PDEProblem& problem, int target_points) {
  return compute_truth(problem, eval_grid(problem, target_points));
}

void save_reference_table(const std::string& path, const PDEProblem& problem, int target_points) {
  save_truth_file(path, problem.name, reference_table(problem, target_points));
}

struct Evaluator::Impl {
  const PDEProblem& problem;
  MLPConfig cfg;
  std::vector<Point> grid;
  std::shared_ptr<const std::vector<double>> truth;  // point-major (n_points x n_outputs)
  detail::MlpJetEngine engine;
  std::vector<double> pred;
  std::vector<double> column_true, column_pred;

  Impl(const PDEProblem& problem_in, const MLPConfig& cfg_in, const std::string& cache_dir)
      : problem(problem_in),
        cfg(cfg_in),
        grid(eval_grid(problem_in)),
        truth(shared_truth(problem_in, grid, cache_dir)),
        engine(cfg_in, JetLayout::value_only(cfg_in.input_dim)) {}
};

Evaluator::Evaluator(const PDEProblem& problem, const MLPConfig& cfg, const std::string& cache_dir)
    : impl_(std::make_unique<Impl>(problem, cfg, cache_dir)) {}
Evaluator::~Evaluator() = default;
Evaluator::Evaluator(Evaluator&&) noexcept = default;

ErrorReport Evaluator::evaluate(const ParameterVector& theta) {
  Impl& im = *impl_;
  const std::vector<double>& truth = *im.truth;
  const int n_out = im.problem.output_dim;
  im.engine.forward(theta, im.grid);
  const auto& out = im.engine.output();  // n_out x n_points (K = 1)
  im.pred.resize(truth.size());
  for (std::size_t i = 0; i < im.grid.size(); ++i)
    for (int o = 0; o < n_out; ++o)
      im.pred[i * n_out + o] = out(o, static_cast<Eigen::Index>(i));

  ErrorReport report;
  report.l2 = l2_relative_error(truth, im.pred);
  if (n_out > 1) {
    report.per_output_l2.resize(n_out);
    const std::size_t n = im.grid.size();
    im.column_true.resize(n);
    im.column_pred.resize(n);
    for (int o = 0; o < n_out; ++o) {
      for (std::size_t i = 0; i < n; ++i) {
        im.column_true[i] = truth[i * n_out + o];
        im.column_pred[i] = im.pred[i * n_out + o];
      }
      report.per_output_l2[o] = l2_relative_error(im.column_true, im.column_pred);
    }
  }
  if (im.problem.n_inverse > 0) {
    report.inverse_rel_err.resize(im.problem.n_inverse);
    for (int k = 0; k < im.problem.n_inverse; ++k) {
      const double estimate = theta[theta.size() - im.problem.n_inverse + k];
      const double truth = im.problem.inverse_truth[k];
      report.inverse_rel_err[k] = std::abs(estimate - truth) / std::abs(truth);
    }
  }
  return report;
}

const char* to_string(RunStatus status) {
  switch (status) {
    case RunStatus::ok: return "ok";
    case RunStatus::diverged: return "diverged";
    case RunStatus::filtered: return "filtered";
  }
  return "?";
}

RunStatus run_status_from_string(const std::string& name) {
  if (name == "ok") return RunStatus::ok;
  if (name == "diverged") return RunStatus::diverged;
  if (name == "filtered") return RunStatus::filtered;
  throw ConfigError("unknown run status: " + name);
}

namespace {

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

void filter_divergent(std::vector<RunRecord>& records, double loss_factor, double l2_factor) {
  std::vector<double> losses, errors;
  for (const RunRecord& r : records) {
    if (r.status == RunStatus::diverged) continue;
    if (std::isfinite(r.final_loss)) losses.push_back(r.final_loss);
    if (std::isfinite(r.errors.l2)) errors.push_back(r.errors.l2);
  }
  if (losses.size() < 2 && errors.size() < 2) return;  // no cohort basis
  const double loss_median = losses.empty() ? 0.0 : median(losses);
  const double l2_median = errors.empty() ? 0.0 : median(errors);
  for (RunRecord& r : records) {
    if (r.status != RunStatus::ok) continue;
    const bool loss_out =
        losses.size() >= 2 && std::isfinite(r.final_loss) && r.final_loss > loss_factor * loss_median;
    const bool l2_out =
        errors.size() >= 2 && std::isfinite(r.errors.l2) && r.errors.l2 > l2_factor * l2_median;
    if (loss_out || l2_out || !std::isfinite(r.errors.l2)) r.status = RunStatus::filtered;
  }
}

AggregateStats aggregate(const std::vector<RunRecord>& records) {
  std::vector<double> values;
  for (const RunRecord& r : records)
    if (r.status == RunStatus::ok) values.push_back(r.errors.l2);
  if (values.empty()) throw ConfigError("aggregate: no ok runs");
  std::sort(values.begin(), values.end());  // order independence
  AggregateStats stats;
  stats.count = static_cast<int>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  stats.mean = sum / stats.count;
  if (stats.count > 1) {
    double acc = 0.0;
    for (double v : values) acc += (v - stats.mean) * (v - stats.mean);
    stats.sd = std::sqrt(acc / (stats.count - 1));
  }
  return stats;
}

const char* kResultsCsvHeader =
    "run_id,problem,sampler,point_optimizer,stepsize,num_steps,period,n_collocation,seed,status,"
    "l2,l2_u,l2_v,l2_p,lambda1_relerr,lambda2_relerr,wall_time_s";

namespace {

std::string g17(double v) {
  char buf[32];
  format_g17(v, buf);
  return buf;
}

}  // namespace

std::string results_csv_row(const RunRecord& r) {
  const bool pacmann = r.sampler == "pacmann";
  std::ostringstream os;
  os << r.run_id << ',' << r.problem << ',' << r.sampler << ',' << r.point_optimizer << ',';
  if (pacmann) os << g17(r.stepsize);
  os << ',';
  if (pacmann) os << r.num_steps;
  os << ',' << r.period << ',' << r.n_collocation << ',' << r.seed << ',' << to_string(r.status)
     << ',';
  if (std::isfinite(r.errors.l2)) os << g17(r.errors.l2);
  for (int o = 0; o < 3; ++o) {
    os << ',';
    if (o < static_cast<int>(r.errors.per_output_l2.size())) os << g17(r.errors.per_output_l2[o]);
  }
  for (int k = 0; k < 2; ++k) {
    os << ',';
    if (k < static_cast<int>(r.errors.inverse_rel_err.size()))
      os << g17(r.errors.inverse_rel_err[k]);
  }
  os << ',' << g17(r.wall_time_s);
  return os.str();
}

void write_results_csv(const std::string& path, const std::vector<RunRecord>& records) {
  std::ofstream out(path);
  if (!out) throw ConfigError("write_results_csv: cannot open " + path);
  out << kResultsCsvHeader << '\n';
  for (const RunRecord& r : records) out << results_csv_row(r) << '\n';
  if (!out) throw ConfigError("write_results_csv: write failed for " + path);
}

std::vector<RunRecord> read_results_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("read_results_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != kResultsCsvHeader)
    throw ConfigError("read_results_csv: bad header in " + path);
  std::vector<RunRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    while (cells.size() < 17) cells.emplace_back();
    RunRecord r;
    r.run_id = cells[0];
    r.problem = cells[1];
    r.sampler = cells[2];
    r.point_optimizer = cells[3];
    r.stepsize = cells[4].empty() ? 0.0 : std::stod(cells[4]);
    r.num_steps = cells[5].empty() ? 0 : std::stoi(cells[5]);
    r.period = std::stoi(cells[6]);
    r.n_collocation = std::stoi(cells[7]);
    r.seed = std::stoull(cells[8]);
    r.status = run_status_from_string(cells[9]);
    r.errors.l2 = cells[10].empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(cells[10]);
    for (int o = 0; o < 3; ++o)
      if (!cells[11 + o].empty()) r.errors.per_output_l2.push_back(std::stod(cells[11 + o]));
    for (int k = 0; k < 2; ++k)
      if (!cells[14 + k].empty()) r.errors.inverse_rel_err.push_back(std::stod(cells[14 + k]));
    r.wall_time_s = std::stod(cells[16]);
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace pinn
