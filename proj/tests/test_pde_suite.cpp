#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "doctest.h"
#include "pinn/pde.hpp"
#include "support/oracles.hpp"

using namespace pinn;
using std::numbers::pi;

namespace {

Jet2 zero_jet(int d) {
  Jet2 j;
  j.value = 0.0;
  j.grad.assign(d, 0.0);
  j.hess.assign(static_cast<std::size_t>(d) * d, 0.0);
  return j;
}

Jet2 const_jet(int d, double value) {
  Jet2 j = zero_jet(d);
  j.value = value;
  return j;
}

}  // namespace

TEST_CASE("burgers residual examples") {
  const double nu = 0.01 / pi;

  SUBCASE("zero field") {
    CHECK(residual_burgers({0.3, 0.5}, zero_jet(2), nu) == 0.0);
  }
  SUBCASE("u = x") {
    for (double x : {-0.7, 0.0, 0.42}) {
      Jet2 j = zero_jet(2);
      j.value = x;
      j.grad[0] = 1.0;
      CHECK(residual_burgers({x, 0.8}, j, nu) == doctest::Approx(x).epsilon(1e-14));
    }
  }
  SUBCASE("u = sin(x) exp(-t) against the symbolic form") {
    AnalyticField field(2, 1, [](std::span<const TaylorVar> q, std::span<TaylorVar> out) {
      out[0] = sin(q[0]) * exp(-q[1]);
    });
    Rng rng = Rng::derive(1, "burgers-symbolic");
    for (int i = 0; i < 25; ++i) {
      const double x = rng.uniform(-1.0, 1.0), t = rng.uniform(0.0, 1.0);
      auto jets = eval_jet2(field, {x, t}, {});
      const double r = residual_burgers({x, t}, jets[0], nu);
      const double expected = std::exp(-t) * std::sin(x) * (-1.0 + std::exp(-t) * std::cos(x) + nu);
      CHECK(r == doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("allen-cahn residual examples") {
  const double d = 0.001;
  CHECK(residual_allen_cahn({0.2, 0.3}, const_jet(2, 1.0), d) == 0.0);
  CHECK(residual_allen_cahn({0.2, 0.3}, const_jet(2, 0.0), d) == 0.0);
  CHECK(residual_allen_cahn({0.2, 0.3}, const_jet(2, 2.0), d) == doctest::Approx(30.0));
}

TEST_CASE("poisson residual examples") {
  SUBCASE("zero field gives -f") {
    const Point mid(5, 0.5);
    CHECK(residual_poisson5(mid, zero_jet(5)) == doctest::Approx(-5.0 * pi * pi).epsilon(1e-13));
  }
  SUBCASE("exact solution annihilates the residual at random interior points") {
    PDEProblem prob = make_poisson5();
    Rng rng = Rng::derive(3, "poisson-exact");
    for (int i = 0; i < 100; ++i) {
      Point p = rng.uniform_in(prob.box);
      auto jets = eval_jet2(*prob.exact_field, p, {});
      CHECK(std::abs(residual_poisson5(p, jets[0])) < 1e-6);
    }
  }
}

TEST_CASE("navier-stokes residual examples") {
  SUBCASE("zero fields") {
    auto r = residual_navier_stokes({2.0, 0.5, 1.0}, zero_jet(3), zero_jet(3), zero_jet(3), 1.0,
                                    0.01);
    CHECK(r[0] == 0.0);
    CHECK(r[1] == 0.0);
  }
  SUBCASE("shear flow u = y") {
    Jet2 u = zero_jet(3);
    u.grad[1] = 1.0;  // du/dy
    Rng rng = Rng::derive(4, "ns-shear");
    for (int i = 0; i < 10; ++i) {
      Point p{rng.uniform(1.0, 8.0), rng.uniform(-2.0, 2.0), rng.uniform(0.0, 7.0)};
      u.value = p[1];
      auto r = residual_navier_stokes(p, u, zero_jet(3), zero_jet(3), 1.0, 0.0);
      CHECK(r[0] == doctest::Approx(0.0));
      CHECK(r[1] == doctest::Approx(0.0));
    }
  }
  SUBCASE("taylor-green satisfies the momentum equations") {
    PDEProblem prob = make_navier_stokes_inverse();
    Rng rng = Rng::derive(5, "ns-tg");
    for (int i = 0; i < 100; ++i) {
      Point p = rng.uniform_in(prob.box);
      auto jets = eval_jet2(*prob.exact_field, p, {});
      auto r = residual_navier_stokes(p, jets[0], jets[1], jets[2], 1.0, 0.01);
      CHECK(std::abs(r[0]) < 1e-8);
      CHECK(std::abs(r[1]) < 1e-8);
    }
  }
}

TEST_CASE("burgers reference") {
  SUBCASE("initial condition recovered") {
    for (double x : {-0.9, -0.3, 0.0, 0.55, 1.0})
      CHECK(reference_burgers(x, 0.0) == doctest::Approx(-std::sin(pi * x)).epsilon(1e-12));
  }
  SUBCASE("boundary values vanish") {
    for (double t : {0.1, 0.5, 1.0}) {
      CHECK(std::abs(reference_burgers(-1.0, t)) < 1e-9);
      CHECK(std::abs(reference_burgers(1.0, t)) < 1e-9);
    }
  }
  SUBCASE("odd symmetry pins u(0, t) = 0") {
    for (double t : {0.05, 0.4, 0.99}) CHECK(std::abs(reference_burgers(0.0, t)) < 1e-9);
  }
  SUBCASE("quadrature refinement self-consistency") {
    const ColeHopfBurgers coarse(0.01 / pi, 160, 10), fine(0.01 / pi, 240, 12);
    Rng rng = Rng::derive(6, "burgers-quad");
    double max_diff = 0.0;
    for (int i = 0; i < 200; ++i) {
      const double x = rng.uniform(-1.0, 1.0), t = rng.uniform(0.0, 1.0);
      max_diff = std::max(max_diff, std::abs(coarse.value(x, t) - fine.value(x, t)));
    }
    CHECK(max_diff < 1e-8);
  }
  SUBCASE("domain errors") {
    CHECK_THROWS_AS(reference_burgers(0.0, -0.1), std::domain_error);
    CHECK_THROWS_AS(reference_burgers(1.5, 0.5), std::domain_error);
  }
}

TEST_CASE("allen-cahn reference") {
  SUBCASE("initial condition recovered") {
    for (double x : {-0.77, -0.2, 0.0, 0.31, 0.9})
      CHECK(reference_allen_cahn(x, 0.0) ==
            doctest::Approx(x * x * std::cos(pi * x)).epsilon(1e-6));
  }
  SUBCASE("boundary values pinned at -1") {
    for (double t : {0.0, 0.33, 1.0}) {
      CHECK(reference_allen_cahn(-1.0, t) == doctest::Approx(-1.0));
      CHECK(reference_allen_cahn(1.0, t) == doctest::Approx(-1.0));
    }
  }
  SUBCASE("grid refinement self-consistency") {
    const AllenCahnTable coarse(0.001, 512), fine(0.001, 1024);
    double max_diff = 0.0;
    for (int ix = 0; ix <= 40; ++ix)
      for (int it = 0; it <= 20; ++it) {
        const double x = -1.0 + 2.0 * ix / 40.0, t = static_cast<double>(it) / 20.0;
        max_diff = std::max(max_diff, std::abs(coarse.value(x, t) - fine.value(x, t)));
      }
    CHECK(max_diff < 1e-3);
  }
  SUBCASE("binary cache round trip") {
    const auto path = (std::filesystem::temp_directory_path() / "pinn_ac_cache.bin").string();
    const AllenCahnTable table(0.001, 64, 1e-3, 10);
    table.save(path);
    auto loaded = AllenCahnTable::load(path, 0.001, 64, 1e-3, 10);
    REQUIRE(loaded != nullptr);
    CHECK(loaded->value(0.3, 0.7) == table.value(0.3, 0.7));
    CHECK(AllenCahnTable::load(path, 0.001, 128, 1e-3, 10) == nullptr);
    std::filesystem::remove(path);
  }
}

TEST_CASE("taylor-green observations") {
  PDEProblem prob = make_navier_stokes_inverse();
  ObservationSet obs = gen_taylor_green(0.01, 200, 99);
  REQUIRE(obs.rows.size() == 200);

  SUBCASE("rows satisfy the momentum equations with the true scalars") {
    for (std::size_t i = 0; i < obs.rows.size(); i += 10) {
      const auto& row = obs.rows[i];
      const Point p{row[1], row[2], row[0]};
      auto jets = eval_jet2(*prob.exact_field, p, {});
      auto r = residual_navier_stokes(p, jets[0], jets[1], jets[2], 1.0, 0.01);
      CHECK(std::abs(r[0]) < 1e-8);
      CHECK(std::abs(r[1]) < 1e-8);
      // row values match the manufactured field
      double uvp[3];
      prob.reference->eval(p, uvp);
      CHECK(row[3] == uvp[0]);
      CHECK(row[4] == uvp[1]);
      CHECK(row[5] == uvp[2]);
    }
  }
  SUBCASE("u vanishes at x = y = pi/2, t = 0") {
    TaylorGreenReference ref(0.01);
    double uvp[3];
    ref.eval({pi / 2, pi / 2, 0.0}, uvp);
    CHECK(uvp[0] == doctest::Approx(0.0));
  }
  SUBCASE("seed determinism and csv round trip") {
    ObservationSet again = gen_taylor_green(0.01, 200, 99);
    CHECK(again.rows == obs.rows);

    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path();
    const auto p1 = (dir / "pinn_obs1.csv").string(), p2 = (dir / "pinn_obs2.csv").string();
    save_observations_csv(p1, obs);
    save_observations_csv(p2, again);
    std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
    std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    CHECK(s1 == s2);
    CHECK(s1.substr(0, 12) == "t,x,y,u,v,p\n");

    ObservationSet loaded = load_observations_csv(p1);
    CHECK(loaded.rows == obs.rows);
    fs::remove(p1);
    fs::remove(p2);
  }
}

TEST_CASE("boundary and initial samplers stay on their faces") {
  for (const auto& name : problem_names()) {
    PDEProblem prob = make_problem(name);
    Rng rng = Rng::derive(11, "faces", std::hash<std::string>{}(name));
    auto pts = prob.boundary.sample(prob.counts.n_bc > 0 ? prob.counts.n_bc : 40, rng);
    const int n_spatial = prob.name == "navier_stokes" ? 2 : prob.input_dim == 2 ? 1 : prob.input_dim;
    for (const Point& p : pts) {
      CHECK(prob.box.contains(p));
      bool on_face = false;
      for (int axis = 0; axis < n_spatial; ++axis)
        if (p[axis] == prob.box.lower[axis] || p[axis] == prob.box.upper[axis]) on_face = true;
      CHECK(on_face);
    }
    if (prob.initial) {
      auto ipts = prob.initial->sample(prob.counts.n_ic > 0 ? prob.counts.n_ic : 40, rng);
      for (const Point& p : ipts) {
        CHECK(prob.box.contains(p));
        CHECK(p.back() == 0.0);
      }
    }
  }
}

TEST_CASE("problem registry exposes the benchmark point counts") {
  PDEProblem burgers = make_burgers();
  CHECK(burgers.counts.n_r == 2500);
  CHECK(burgers.counts.n_bc == 80);
  CHECK(burgers.counts.n_ic == 160);

  PDEProblem ac = make_allen_cahn();
  CHECK(ac.counts.n_r == 2500);
  CHECK(ac.counts.n_bc == 80);
  CHECK(ac.counts.n_ic == 160);

  PDEProblem poisson = make_poisson5();
  CHECK(poisson.counts.n_r == 750);
  CHECK(poisson.counts.n_bc == 750);
  CHECK(poisson.counts.n_ic == 0);

  PDEProblem ns = make_navier_stokes_inverse();
  CHECK(ns.counts.n_r == 700);
  CHECK(ns.counts.n_bc == 200);
  CHECK(ns.counts.n_ic == 100);
  CHECK(ns.counts.n_ref == 7000);
  CHECK(ns.n_inverse == 2);
  CHECK(ns.inverse_truth == std::vector<double>{1.0, 0.01});

  CHECK_THROWS_AS(make_problem("heat"), ConfigError);
}

TEST_CASE("default architectures follow the benchmark description") {
  CHECK(make_burgers().default_net.hidden == std::vector<int>{64, 64, 64, 64});
  CHECK(make_navier_stokes_inverse().default_net.hidden == std::vector<int>(6, 50));
  CHECK(make_navier_stokes_inverse().default_net.n_inverse == 2);
  CHECK(make_poisson5().default_net.input_dim == 5);
}
