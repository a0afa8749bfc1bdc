#include <cmath>

#include "doctest.h"
#include "pinn/pacmann.hpp"
#include "support/oracles.hpp"

using namespace pinn;

namespace {

PacmannConfig config(PointOptimizerKind kind, double s, int t) {
  PacmannConfig cfg;
  cfg.optimizer = kind;
  cfg.stepsize = s;
  cfg.num_steps = t;
  return cfg;
}

// Synthetic landscape with r^2(x, y) = exp(-(x^2 + y^2)); the field is
// irrelevant because the residual reads the coordinates only.
PDEProblem gaussian_bump_problem() {
  PDEProblem prob;
  prob.name = "synthetic_bump";
  prob.box = DomainBox{{-1.0, -1.0}, {1.0, 1.0}};
  prob.input_dim = 2;
  prob.output_dim = 1;
  prob.residual = make_residual_op(1, 1, {}, [](const auto& args, auto out) {
    using std::exp;
    out[0] = exp((args.coords[0] * args.coords[0] + args.coords[1] * args.coords[1]) * -0.5);
  });
  return prob;
}

PDEProblem outward_drift_problem() {
  PDEProblem prob;
  prob.name = "synthetic_drift";
  prob.box = DomainBox{{-1.0}, {1.0}};
  prob.input_dim = 1;
  prob.output_dim = 1;
  prob.residual = make_residual_op(1, 1, {}, [](const auto& args, auto out) {
    using std::exp;
    out[0] = exp(args.coords[0] * 0.5);
  });
  return prob;
}

const AnalyticField& dummy_field(int dim) {
  static AnalyticField f1(1, 1, [](std::span<const TaylorVar> q, std::span<TaylorVar> out) {
    out[0] = q[0];
  });
  static AnalyticField f2(2, 1, [](std::span<const TaylorVar> q, std::span<TaylorVar> out) {
    out[0] = q[0];
  });
  return dim == 1 ? f1 : f2;
}

double mean_sq_residual(const PDEProblem& prob, std::span<const Point> pts) {
  ResidualValues values(prob.residual, dummy_field(prob.input_dim));
  const auto& r = values.eval(pts, {}, {});
  double acc = 0.0;
  for (double v : r) acc += v * v;
  return acc / static_cast<double>(pts.size());
}

constexpr double kPhi = 1.6180339887498948482;

}  // namespace

TEST_CASE("inner step first-step closed forms") {
  PacmannConfig cfg;

  SUBCASE("gradient ascent") {
    cfg = config(PointOptimizerKind::gradient_ascent, 0.1, 1);
    PointOptimizerState st(1);
    auto x = inner_step(cfg.optimizer, {0.5}, std::vector<double>{2.0}, st, cfg);
    CHECK(x[0] == doctest::Approx(0.7).epsilon(1e-15));
  }
  SUBCASE("nonlinear gradient ascent saturates") {
    cfg = config(PointOptimizerKind::nonlinear_ga, 0.1, 1);
    PointOptimizerState st(1);
    auto x = inner_step(cfg.optimizer, {0.2}, std::vector<double>{1000.0}, st, cfg);
    CHECK(x[0] == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(x[0] < 0.3 + 1e-15);
  }
  SUBCASE("momentum first step uses V1 = 0.1 g") {
    cfg = config(PointOptimizerKind::momentum, 0.01, 1);
    PointOptimizerState st(1);
    auto x = inner_step(cfg.optimizer, {0.0}, std::vector<double>{1.0}, st, cfg);
    CHECK(x[0] == doctest::Approx(0.001).epsilon(1e-15));
    CHECK(st.v[0] == doctest::Approx(0.1).epsilon(1e-15));
  }
  SUBCASE("adam first step is s * sign(g) up to epsilon effects") {
    cfg = config(PointOptimizerKind::adam, 0.05, 1);
    for (double g : {3.7, -0.8, 11.0}) {
      PointOptimizerState st(1);
      auto x = inner_step(cfg.optimizer, {0.0}, std::vector<double>{g}, st, cfg);
      CHECK(x[0] == doctest::Approx(0.05 * (g > 0 ? 1.0 : -1.0)).epsilon(1e-5));
    }
  }
  SUBCASE("rmsprop first step: S1 = 0.001 g^2") {
    cfg = config(PointOptimizerKind::rmsprop, 1e-3, 1);
    PointOptimizerState st(1);
    auto x = inner_step(cfg.optimizer, {0.0}, std::vector<double>{1.0}, st, cfg);
    const double expected = 1e-3 / std::sqrt(0.001 + 1e-8);
    CHECK(expected == doctest::Approx(0.031623).epsilon(1e-4));
    CHECK(x[0] == doctest::Approx(expected).epsilon(1e-15));
    CHECK(st.s[0] == doctest::Approx(0.001).epsilon(1e-15));
  }
  SUBCASE("non-finite gradient is a numeric error and leaves state untouched") {
    cfg = config(PointOptimizerKind::adam, 0.05, 1);
    PointOptimizerState st(1);
    CHECK_THROWS_AS(
        inner_step(cfg.optimizer, {0.0}, std::vector<double>{std::nan("")}, st, cfg),
        NumericError);
    CHECK(st.is_zero());
  }
  SUBCASE("golden section is rejected as a stepwise rule") {
    cfg = config(PointOptimizerKind::golden_section, 0.05, 1);
    PointOptimizerState st(1);
    CHECK_THROWS_AS(inner_step(cfg.optimizer, {0.0}, std::vector<double>{1.0}, st, cfg),
                    ConfigError);
  }
}

// Straight-line reimplementations of the five stepwise rules, three steps on
// the surrogate r^2(x) = -(x - a)^2 + c whose gradient is -2 (x - a).
TEST_CASE("three-step trajectories match a straight-line oracle") {
  const double a = 0.3, s = 0.05;
  auto grad = [&](double x) { return -2.0 * (x - a); };

  auto run_impl = [&](PointOptimizerKind kind) {
    PacmannConfig cfg = config(kind, s, 3);
    PointOptimizerState st(1);
    Point x{0.9};
    for (int i = 0; i < 3; ++i) x = inner_step(kind, x, std::vector<double>{grad(x[0])}, st, cfg);
    return x[0];
  };

  SUBCASE("gradient ascent") {
    double x = 0.9;
    for (int i = 0; i < 3; ++i) x += s * grad(x);
    CHECK(std::abs(run_impl(PointOptimizerKind::gradient_ascent) - x) < 1e-12);
  }
  SUBCASE("nonlinear gradient ascent") {
    double x = 0.9;
    for (int i = 0; i < 3; ++i) x += s * std::tanh(grad(x));
    CHECK(std::abs(run_impl(PointOptimizerKind::nonlinear_ga) - x) < 1e-12);
  }
  SUBCASE("rmsprop") {
    double x = 0.9, S = 0.0;
    for (int i = 0; i < 3; ++i) {
      const double g = grad(x);
      S = 0.999 * S + 0.001 * g * g;
      x += s * g / std::sqrt(S + 1e-8);
    }
    CHECK(std::abs(run_impl(PointOptimizerKind::rmsprop) - x) < 1e-12);
  }
  SUBCASE("momentum") {
    double x = 0.9, V = 0.0;
    for (int i = 0; i < 3; ++i) {
      V = 0.9 * V + 0.1 * grad(x);
      x += s * V;
    }
    CHECK(std::abs(run_impl(PointOptimizerKind::momentum) - x) < 1e-12);
  }
  SUBCASE("adam") {
    double x = 0.9, V = 0.0, S = 0.0;
    for (int i = 1; i <= 3; ++i) {
      const double g = grad(x);
      V = 0.9 * V + 0.1 * g;
      S = 0.999 * S + 0.001 * g * g;
      const double vhat = V / (1.0 - std::pow(0.9, i));
      const double shat = S / (1.0 - std::pow(0.999, i));
      x += s * vhat / std::sqrt(shat + 1e-8);
    }
    CHECK(std::abs(run_impl(PointOptimizerKind::adam) - x) < 1e-12);
  }
  SUBCASE("golden section against its reimplementation") {
    auto f = [&](const Point& p) { return -(p[0] - a) * (p[0] - a); };
    const double g0 = grad(0.9);
    // test-side reimplementation
    double lo = 0.0, hi = 1.0;
    const double invphi = 1.0 / kPhi;
    double xl = lo + (1.0 - invphi) * (hi - lo), xr = lo + invphi * (hi - lo);
    auto at = [&](double xi) { return 0.9 + xi * s * g0; };
    double fl = f({at(xl)}), fr = f({at(xr)});
    for (int i = 0; i < 3; ++i) {
      if (fl > fr) {
        hi = xr; xr = xl; fr = fl;
        xl = lo + (1.0 - invphi) * (hi - lo);
        fl = f({at(xl)});
      } else {
        lo = xl; xl = xr; fl = fr;
        xr = lo + invphi * (hi - lo);
        fr = f({at(xr)});
      }
    }
    const double expected = at(0.5 * (lo + hi));
    auto got = golden_section_move({0.9}, std::vector<double>{g0}, f, s, 3);
    CHECK(std::abs(got[0] - expected) < 1e-12);
  }
}

TEST_CASE("golden section line search") {
  SUBCASE("T=20 localizes the quadratic maximum within the phi^-20 bound") {
    // maximize f(xi) = -(xi - 0.3)^2 from x=0 with b0 = 1
    auto f = [](const Point& p) { return -(p[0] - 0.3) * (p[0] - 0.3); };
    auto out = golden_section_move({0.0}, std::vector<double>{1.0}, f, 1.0, 20);

    // brute-force maximizer oracle on a fine grid
    double best_xi = 0.0, best_f = -1e300;
    for (int i = 0; i <= 1000000; ++i) {
      const double xi = i * 1e-6;
      if (f({xi}) > best_f) { best_f = f({xi}); best_xi = xi; }
    }
    CHECK(best_xi == doctest::Approx(0.3).epsilon(1e-5));
    const double bound = 3.0 * std::pow(kPhi, -20.0);
    CHECK(bound < 2.1e-4);
    CHECK(std::abs(out[0] - best_xi) < bound);
  }
  SUBCASE("interval shrinks by exactly 1/phi per iteration") {
    // constant objective takes the shift-right branch every time, so the
    // final interval is [1 - phi^-T, 1] and the midpoint pins its length
    auto f = [](const Point&) { return 7.0; };
    for (int T : {1, 2, 5, 9}) {
      auto out = golden_section_move({0.0}, std::vector<double>{1.0}, f, 1.0, T);
      const double expected = 1.0 - 0.5 * std::pow(kPhi, -T);
      CHECK(out[0] == doctest::Approx(expected).epsilon(1e-12));
    }
  }
  SUBCASE("one new evaluation per iteration") {
    int calls = 0;
    auto f = [&](const Point& p) { ++calls; return -p[0] * p[0]; };
    golden_section_move({0.2}, std::vector<double>{-0.4}, f, 1.0, 10);
    CHECK(calls == 12);  // two bracket evaluations plus one per iteration
  }
  SUBCASE("zero gradient returns the point unchanged") {
    auto f = [](const Point& p) { return -p[0] * p[0]; };
    auto out = golden_section_move({0.4}, std::vector<double>{0.0}, f, 1.0, 10);
    CHECK(out[0] == 0.4);
  }
}

TEST_CASE("pacmann move on the frozen gaussian landscape") {
  PDEProblem prob = gaussian_bump_problem();
  const AnalyticField& field = dummy_field(2);
  CollocationSet initial = hammersley(1000, prob.box);

  SUBCASE("s=0 and T=0 are exact identities") {
    auto a = pacmann_move(initial, prob, field, {}, config(PointOptimizerKind::adam, 0.0, 5), 1);
    CHECK(a.points == initial.points);
    auto b = pacmann_move(initial, prob, field, {},
                          config(PointOptimizerKind::gradient_ascent, 1e-3, 0), 1);
    CHECK(b.points == initial.points);
  }

  SUBCASE("gradient ascent moves points toward the residual peak") {
    PacmannMoveStats stats;
    auto moved = pacmann_move(initial, prob, field, {},
                              config(PointOptimizerKind::gradient_ascent, 1e-3, 5), 1, &stats);
    REQUIRE(moved.size() == initial.size());
    CHECK(stats.replaced == 0);
    for (std::size_t i = 0; i < moved.size(); ++i) {
      const double before = std::hypot(initial.points[i][0], initial.points[i][1]);
      const double after = std::hypot(moved.points[i][0], moved.points[i][1]);
      CHECK(after <= before + 1e-15);
    }
    CHECK(mean_sq_residual(prob, moved.points) > mean_sq_residual(prob, initial.points));
    moved.validate(prob.box);
  }

  SUBCASE("every optimizer kind preserves containment and cardinality") {
    for (auto kind : {PointOptimizerKind::gradient_ascent, PointOptimizerKind::nonlinear_ga,
                      PointOptimizerKind::rmsprop, PointOptimizerKind::momentum,
                      PointOptimizerKind::adam, PointOptimizerKind::golden_section}) {
      auto moved = pacmann_move(initial, prob, field, {}, config(kind, 1e-2, 3), 7);
      CHECK(moved.size() == initial.size());
      moved.validate(prob.box);
    }
  }

  SUBCASE("determinism including replacement draws") {
    auto cfg = config(PointOptimizerKind::gradient_ascent, 50.0, 5);  // big steps force escapes
    PacmannMoveStats s1, s2;
    auto a = pacmann_move(initial, prob, field, {}, cfg, 42, &s1);
    auto b = pacmann_move(initial, prob, field, {}, cfg, 42, &s2);
    CHECK(a.points == b.points);
    CHECK(a.origins == b.origins);
    CHECK(s1.replaced == s2.replaced);
    CHECK(s1.replaced > 0);
    auto c = pacmann_move(initial, prob, field, {}, cfg, 43);
    CHECK(a.points != c.points);
  }

  SUBCASE("batched golden section matches the single-point search") {
    auto cfg = config(PointOptimizerKind::golden_section, 0.1, 6);
    CollocationSet small;
    for (int i = 0; i < 5; ++i) small.append({-0.9 + 0.37 * i, 0.2 + 0.1 * i}, PointOrigin::initial);
    auto moved = pacmann_move(small, prob, field, {}, cfg, 3);

    ResidualValues values(prob.residual, field);
    SqResidualGradient grads(prob.residual, field);
    auto g = grads.eval(small.points, {}, {});
    for (std::size_t i = 0; i < small.size(); ++i) {
      auto objective = [&](const Point& p) {
        const std::vector<Point> pts{p};
        const auto& r = values.eval(pts, {}, {});
        return r[0] * r[0];
      };
      auto expected = golden_section_move(small.points[i], g[i], objective, cfg.stepsize,
                                          cfg.num_steps);
      for (int c = 0; c < 2; ++c) CHECK(moved.points[i][c] == doctest::Approx(expected[c]).epsilon(1e-14));
    }
  }
}

TEST_CASE("escaping points are replaced uniformly and frozen") {
  PDEProblem prob = outward_drift_problem();
  const AnalyticField& field = dummy_field(1);
  CollocationSet set;
  set.append({0.999}, PointOrigin::initial);  // outward gradient, one step exits

  PacmannMoveStats stats;
  auto moved = pacmann_move(set, prob, field, {},
                            config(PointOptimizerKind::gradient_ascent, 1.0, 3), 11, &stats);
  REQUIRE(moved.size() == 1);
  CHECK(stats.replaced == 1);
  CHECK(moved.origins[0] == PointOrigin::replaced);
  CHECK(prob.box.contains(moved.points[0]));
}

TEST_CASE("pacmann move against a real problem and network") {
  PDEProblem prob = make_burgers();
  MLPField field(prob.default_net);
  ParameterVector theta = init_glorot(prob.default_net, 5);
  CollocationSet initial = hammersley(200, prob.box);

  auto moved = pacmann_move(initial, prob, field, theta,
                            config(PointOptimizerKind::adam, 1e-5, 5), 9);
  CHECK(moved.size() == 200);
  moved.validate(prob.box);
  CHECK(moved.points != initial.points);
}
