#include "pinn/pde.hpp"

#include <cmath>
#include <numbers>

namespace pinn {

using std::numbers::pi;

namespace {

// Uniform sampler over an axis-aligned face set: face k pins one coordinate
// to a box bound, the rest are uniform. Points are assigned to faces
// round-robin so every face receives its share.
std::vector<Point> sample_faces(const DomainBox& box, const std::vector<std::pair<int, double>>& faces,
                                int n, Rng& rng) {
  std::vector<Point> pts(n);
  for (int i = 0; i < n; ++i) {
    const auto& [axis, value] = faces[i % faces.size()];
    Point p = rng.uniform_in(box);
    p[axis] = value;
    pts[i] = std::move(p);
  }
  return pts;
}

std::vector<std::pair<int, double>> spatial_faces(const DomainBox& box, int n_spatial) {
  std::vector<std::pair<int, double>> faces;
  for (int axis = 0; axis < n_spatial; ++axis) {
    faces.emplace_back(axis, box.lower[axis]);
    faces.emplace_back(axis, box.upper[axis]);
  }
  return faces;
}

MLPConfig net_config(int input_dim, int output_dim, int layers, int width, int n_inverse = 0) {
  MLPConfig cfg;
  cfg.input_dim = input_dim;
  cfg.output_dim = output_dim;
  cfg.hidden.assign(layers, width);
  cfg.n_inverse = n_inverse;
  return cfg;
}

}//namespace

PDEProblem make_burgers() {
  PDEProblem prob;
  prob.name = "burgers";
  prob.box = DomainBox{{-1.0, 0.0}, {1.0, 1.0}};  // (x, t)
  prob.input_dim = 2;
  prob.output_dim = 1;
  prob.params = ProblemParams{};
  const double nu = prob.params.nu;

  // u_t + u u_x - nu u_xx
  prob.residual = make_residual_op(1, 1, {{0, 0}}, [nu](const auto& args, auto out) {
    out[0] = args.grad(0, 1) + args.value(0) * args.grad(0, 0) - nu * args.hess(0, 0, 0);
  });

  prob.boundary.sample = [box = prob.box](int n, Rng& rng) {
    return sample_faces(box, spatial_faces(box, 1), n, rng);
  };
  prob.boundary.target = [](const Point&, std::span<double> out) { out[0] = 0.0; };
  prob.initial = DirichletSpec{
      [box = prob.box](int n, Rng& rng) {
        std::vector<Point> pts(n);
        for (int i = 0; i < n; ++i) pts[i] = Point{rng.uniform(box.lower[0], box.upper[0]), 0.0};
        return pts;
      },
      [](const Point& p, std::span<double> out) { out[0] = -std::sin(pi * p[0]); }};

  prob.reference = std::make_shared<ColeHopfBurgers>(nu);
  prob.counts = {2500, 80, 160, 0};
  prob.default_net = net_config(2, 1, 4, 64);
  return prob;
}

PDEProblem make_allen_cahn() {
  PDEProblem prob;
  prob.name = "allen_cahn";
  prob.box = DomainBox{{-1.0, 0.0}, {1.0, 1.0}};  // (x, t)
  prob.input_dim = 2;
  prob.output_dim = 1;
  prob.params = ProblemParams{};
  const double d = prob.params.d_ac;

  // u_t - d u_xx - 5 (u - u^3)
  prob.residual = make_residual_op(1, 1, {{0, 0}}, [d](const auto& args, auto out) {
    const auto& u = args.value(0);
    out[0] = args.grad(0, 1) - d * args.hess(0, 0, 0) - (u - u * u * u) * 5.0;
  });

  prob.boundary.sample = [box = prob.box](int n, Rng& rng) {
    return sample_faces(box, spatial_faces(box, 1), n, rng);
  };
  prob.boundary.target = [](const Point&, std::span<double> out) { out[0] = -1.0; };
  prob.initial = DirichletSpec{
      [box = prob.box](int n, Rng& rng) {
        std::vector<Point> pts(n);
        for (int i = 0; i < n; ++i) pts[i] = Point{rng.uniform(box.lower[0], box.upper[0]), 0.0};
        return pts;
      },
      [](const Point& p, std::span<double> out) {
        out[0] = p[0] * p[0] * std::cos(pi * p[0]);
      }};

  // one table per process: the integration is not free and the parameters
  // are fixed by the benchmark
  static const std::shared_ptr<const AllenCahnTable> table =
      std::make_shared<AllenCahnTable>(0.001);
  prob.reference = table;
  prob.counts = {2500, 80, 160, 0};
  prob.default_net = net_config(2, 1, 4, 64);
  return prob;
}

namespace {

class PoissonExactReference final : public ReferenceSolution {
 public:
  int output_dim() const override { return 1; }
  void eval(const Point& p, std::span<double> out) const override {
    double v = 1.0;
    for (double c : p) v *= std::sin(pi * c);
    out[0] = v;
  }
};

}  // namespace

PDEProblem make_poisson5() {
  PDEProblem prob;
  prob.name = "poisson5";
  prob.box = DomainBox{std::vector<double>(5, -1.0), std::vector<double>(5, 1.0)};
  prob.input_dim = 5;
  prob.output_dim = 1;

  // -lap v - f, with f = 5 pi^2 prod_i sin(pi x_i)
  std::vector<std::pair<int, int>> diag;
  for (int i = 0; i < 5; ++i) diag.emplace_back(i, i);
  prob.residual = make_residual_op(1, 1, diag, [](const auto& args, auto out) {
    using std::sin;
    using T = std::remove_cvref_t<decltype(args.value(0))>;
    T lap = args.hess(0, 0, 0);
    for (int i = 1; i < 5; ++i) lap += args.hess(0, i, i);
    T f = sin(args.coords[0] * pi);
    for (int i = 1; i < 5; ++i) f = f * sin(args.coords[i] * pi);
    out[0] = -lap - f * (5.0 * pi * pi);
  });

  prob.boundary.sample = [box = prob.box](int n, Rng& rng) {
    return sample_faces(box, spatial_faces(box, 5), n, rng);
  };
  prob.boundary.target = [](const Point&, std::span<double> out) { out[0] = 0.0; };

  prob.reference = std::make_shared<PoissonExactReference>();
  prob.exact_field =
      std::make_shared<AnalyticField>(5, 1, [](std::span<const TaylorVar> q, std::span<TaylorVar> out) {
        TaylorVar v = sin(q[0] * pi);
        for (int i = 1; i < 5; ++i) v = v * sin(q[i] * pi);
        out[0] = v;
      });
  prob.counts = {750, 750, 0, 0};
  prob.default_net = net_config(5, 1, 4, 64);
  return prob;
}

PDEProblem make_navier_stokes_inverse() {
  PDEProblem prob;
  prob.name = "navier_stokes";
  prob.box = DomainBox{{1.0, -2.0, 0.0}, {8.0, 2.0, 7.0}};  // (x, y, t)
  prob.input_dim = 3;
  prob.output_dim = 3;  // (u, v, p)
  prob.params = ProblemParams{};
  const double nu = prob.params.lambda2;

  // Momentum residuals with trainable lambda1, lambda2:
  //   u_t + l1 (u u_x + v u_y) + p_x - l2 (u_xx + u_yy)
  //   v_t + l1 (u v_x + v v_y) + p_y - l2 (v_xx + v_yy)
  prob.residual = make_residual_op(3, 2, {{0, 0}, {1, 1}}, [](const auto& args, auto out) {
    const auto& l1 = args.inverse[0];
    const auto& l2 = args.inverse[1];
    const auto& u = args.value(0);
    const auto& v = args.value(1);
    out[0] = args.grad(0, 2) + l1 * (u * args.grad(0, 0) + v * args.grad(0, 1)) + args.grad(2, 0) -
             l2 * (args.hess(0, 0, 0) + args.hess(0, 1, 1));
    out[1] = args.grad(1, 2) + l1 * (u * args.grad(1, 0) + v * args.grad(1, 1)) + args.grad(2, 1) -
             l2 * (args.hess(1, 0, 0) + args.hess(1, 1, 1));
  });

  auto reference = std::make_shared<TaylorGreenReference>(nu);
  prob.boundary.sample = [box = prob.box](int n, Rng& rng) {
    return sample_faces(box, spatial_faces(box, 2), n, rng);
  };
  prob.boundary.target = [reference](const Point& p, std::span<double> out) {
    reference->eval(p, out);
  };
  prob.initial = DirichletSpec{[box = prob.box](int n, Rng& rng) {
                                 std::vector<Point> pts(n);
                                 for (int i = 0; i < n; ++i) {
                                   Point p = rng.uniform_in(box);
                                   p[2] = 0.0;
                                   pts[i] = std::move(p);
                                 }
                                 return pts;
                               },
                               [reference](const Point& p, std::span<double> out) {
                                 reference->eval(p, out);
                               }};

  prob.reference = reference;
  prob.exact_field = std::make_shared<AnalyticField>(make_taylor_green_field(nu));
  prob.counts = {700, 200, 100, 7000};
  prob.default_net = net_config(3, 3, 6, 50, 2);
  prob.n_inverse = 2;
  prob.inverse_names = {"lambda1", "lambda2"};
  prob.inverse_truth = {1.0, nu};
  return prob;
}

PDEProblem make_problem(const std::string& name) {
  if (name == "burgers") return make_burgers();
  if (name == "allen_cahn") return make_allen_cahn();
  if (name == "poisson5") return make_poisson5();
  if (name == "navier_stokes") return make_navier_stokes_inverse();
  throw ConfigError("unknown problem: " + name);
}

std::vector<std::string> problem_names() {
  return {"burgers", "allen_cahn", "poisson5", "navier_stokes"};
}

void eval_residual(const ResidualOp& op, const Point& p, std::span<const Jet2> jets,
                   std::span<const double> inverse, std::span<double> out) {
  const int d = static_cast<int>(p.size());
  const JetLayout layout = JetLayout::second_order(d, op.hessian_pairs);
  const int k = layout.channels();
  std::vector<double> channels(static_cast<std::size_t>(jets.size()) * k);
  for (std::size_t o = 0; o < jets.size(); ++o) {
    double* dst = channels.data() + o * k;
    for (int c = 0; c < k; ++c) {
      const JetChannel& e = layout.entries()[c];
      switch (e.order) {
        case 0: dst[c] = jets[o].value; break;
        case 1: dst[c] = jets[o].grad[e.idx[0]]; break;
        default: dst[c] = jets[o].hess_at(e.idx[0], e.idx[1]); break;
      }
    }
  }
  ResidualArgs<double> args{std::span<const double>(p.data(), p.size()), channels.data(), &layout,
                            inverse};
  op.eval(args, out);
}

double residual_burgers(const Point& p, const Jet2& u, double nu) {
  const ResidualOp op = make_residual_op(1, 1, {{0, 0}}, [nu](const auto& args, auto out) {
    out[0] = args.grad(0, 1) + args.value(0) * args.grad(0, 0) - nu * args.hess(0, 0, 0);
  });
  double r;
  eval_residual(op, p, std::span<const Jet2>(&u, 1), {}, std::span<double>(&r, 1));
  return r;
}

double residual_allen_cahn(const Point& p, const Jet2& u, double d) {
  const ResidualOp op = make_residual_op(1, 1, {{0, 0}}, [d](const auto& args, auto out) {
    const auto& v = args.value(0);
    out[0] = args.grad(0, 1) - d * args.hess(0, 0, 0) - (v - v * v * v) * 5.0;
  });
  double r;
  eval_residual(op, p, std::span<const Jet2>(&u, 1), {}, std::span<double>(&r, 1));
  return r;
}

double residual_poisson5(const Point& p, const Jet2& v) {
  static const PDEProblem prob = make_poisson5();
  double r;
  eval_residual(prob.residual, p, std::span<const Jet2>(&v, 1), {}, std::span<double>(&r, 1));
  return r;
}

std::array<double, 2> residual_navier_stokes(const Point& p, const Jet2& u, const Jet2& v,
                                             const Jet2& pressure, double lambda1, double lambda2) {
  static const PDEProblem prob = make_navier_stokes_inverse();
  const Jet2 jets[3] = {u, v, pressure};
  const double inverse[2] = {lambda1, lambda2};
  std::array<double, 2> r{};
  eval_residual(prob.residual, p, std::span<const Jet2>(jets, 3),
                std::span<const double>(inverse, 2), std::span<double>(r.data(), 2));
  return r;
}

std::vector<double> input_gradient_sq_residual(const PDEProblem& problem,
                                               const DifferentiableField& field, const Point& p,
                                               const ParameterVector& theta) {
  std::span<const double> inverse(theta.data() + theta.size() - problem.n_inverse,
                                  static_cast<std::size_t>(problem.n_inverse));
  return input_gradient_sq_residual(problem.residual, field, p, theta, inverse);
}

}  // namespace pinn
