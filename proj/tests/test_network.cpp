#include <cmath>
#include <cstdio>
#include <filesystem>

#include "doctest.h"
#include "pinn/diff_engine.hpp"
#include "pinn/mlp.hpp"
#include "support/oracles.hpp"

using namespace pinn;

TEST_CASE("glorot init is deterministic and bounded") {
  MLPConfig cfg;
  cfg.input_dim = 64;
  cfg.output_dim = 64;
  cfg.hidden = {};
  auto a = init_glorot(cfg, 7);
  auto b = init_glorot(cfg, 7);
  CHECK(a == b);
  auto c = init_glorot(cfg, 8);
  CHECK(a != c);

  const double bound = std::sqrt(6.0 / 128.0);
  CHECK(bound == doctest::Approx(0.2165).epsilon(1e-3));
  for (int i = 0; i < 64 * 64; ++i) {
    CHECK(a[i] > -bound);
    CHECK(a[i] < bound);
  }
  // biases exactly zero
  for (int i = 64 * 64; i < 64 * 64 + 64; ++i) CHECK(a[i] == 0.0);
}

TEST_CASE("parameter count formula") {
  MLPConfig cfg;
  cfg.input_dim = 2;
  cfg.output_dim = 1;
  cfg.hidden = {64, 64, 64, 64};
  CHECK(cfg.net_param_count() == 2 * 64 + 64 + 3 * (64 * 64 + 64) + 64 + 1);
  cfg.n_inverse = 2;
  CHECK(cfg.param_count() == cfg.net_param_count() + 2);
}

TEST_CASE("forward of the zero network is zero") {
  MLPConfig cfg;
  cfg.input_dim = 3;
  cfg.output_dim = 2;
  cfg.hidden = {5, 4};
  ParameterVector theta(cfg.param_count(), 0.0);
  auto out = mlp_forward(cfg, theta, {0.3, -0.2, 0.9});
  CHECK(out[0] == 0.0);
  CHECK(out[1] == 0.0);

  auto jets = mlp_forward_jet2(cfg, theta, {0.3, -0.2, 0.9});
  for (const Jet2& j : jets) {
    CHECK(j.value == 0.0);
    for (double g : j.grad) CHECK(g == 0.0);
    for (double h : j.hess) CHECK(h == 0.0);
  }
}

TEST_CASE("tanh(0) = 0 through a single layer") {
  MLPConfig cfg;
  cfg.input_dim = 1;
  cfg.output_dim = 1;
  cfg.hidden = {1};
  ParameterVector theta{1.0, 0.0, 1.0, 0.0};
  CHECK(mlp_forward(cfg, theta, {0.0})[0] == 0.0);
}

TEST_CASE("forward matches the straight-line reference implementation") {
  for (int trial = 0; trial < 10; ++trial) {
    auto net = oracle::random_mlp(500 + trial, 1 + trial % 4, 1 + trial % 3);
    Rng rng = Rng::derive(3, "fwd-ref", trial);
    Point p(net.cfg.input_dim);
    for (auto& c : p) c = rng.uniform(-2.0, 2.0);
    auto got = mlp_forward(net.cfg, net.theta, p);
    auto want = oracle::mlp_forward_reference(net.cfg, net.theta, p);
    for (int o = 0; o < net.cfg.output_dim; ++o)
      CHECK(std::abs(got[o] - want[o]) < 1e-12);
  }
}

TEST_CASE("forward is reproducible") {
  auto net = oracle::random_mlp(99, 2, 1);
  const Point p{0.1, 0.7};
  auto a = mlp_forward(net.cfg, net.theta, p);
  auto b = mlp_forward(net.cfg, net.theta, p);
  CHECK(a == b);
}

TEST_CASE("one-neuron jet: u_x = w (1 - u^2)") {
  MLPConfig cfg;
  cfg.input_dim = 1;
  cfg.output_dim = 1;
  cfg.hidden = {1};
  const double w = 1.7, b = -0.4;
  ParameterVector theta{w, b, 1.0, 0.0};  // u = tanh(w x + b)
  for (double x : {-1.0, 0.0, 0.25, 2.0}) {
    auto j = mlp_forward_jet2(cfg, theta, {x})[0];
    CHECK(j.grad[0] == doctest::Approx(w * (1.0 - j.value * j.value)).epsilon(1e-13));
  }
}

TEST_CASE("checkpoint round trip") {
  MLPConfig cfg;
  cfg.input_dim = 3;
  cfg.output_dim = 3;
  cfg.hidden = {50, 50};
  cfg.n_inverse = 2;
  ParameterVector theta = init_glorot(cfg, 123);
  theta[cfg.net_param_count()] = 1.25;
  theta[cfg.net_param_count() + 1] = -0.01;

  const std::string path = (std::filesystem::temp_directory_path() / "pinn_ckpt_test.bin").string();
  save_checkpoint(path, cfg, theta);
  auto [cfg2, theta2] = load_checkpoint(path);
  CHECK(cfg2 == cfg);
  CHECK(theta2 == theta);

  // header is a single readable line
  FILE* f = std::fopen(path.c_str(), "rb");
  char line[128] = {};
  REQUIRE(std::fgets(line, sizeof line, f) != nullptr);
  std::fclose(f);
  CHECK(std::string(line) == "mlp 3 3 50 50 2\n");
  std::filesystem::remove(path);
}

TEST_CASE("inverse scalars live at the tail") {
  MLPConfig cfg;
  cfg.input_dim = 2;
  cfg.output_dim = 1;
  cfg.hidden = {4};
  cfg.n_inverse = 2;
  ParameterVector theta(cfg.param_count(), 0.0);
  theta[cfg.net_param_count()] = 3.5;
  theta[cfg.net_param_count() + 1] = -1.5;
  CHECK(inverse_scalar(cfg, theta, 0) == 3.5);
  CHECK(inverse_scalar(cfg, theta, 1) == -1.5);
  CHECK_THROWS_AS(inverse_scalar(cfg, theta, 2), ConfigError);
}
