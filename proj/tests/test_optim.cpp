#include <doctest.h>

#include <cmath>

#include "danmaku/error.hpp"
#include "danmaku/optim.hpp"

using namespace danmaku;

TEST_CASE("adam with a constant gradient moves lr per step") {
  // With g fixed the bias-corrected moments are exactly g and g^2, so each
  // step is lr * g / (|g| + eps).
  Parameter p("p", Tensor({3}, std::vector<double>{0.0, 1.0, -1.0}));
  const std::vector<double> g{0.5, -2.0, 1e-3};
  AdamConfig cfg;
  cfg.learning_rate = 0.01;
  Adam opt({&p}, cfg);
  for (int t = 1; t <= 50; ++t) {
    for (std::size_t i = 0; i < 3; ++i) p.grad[i] = g[i];
    opt.step();
  }
  const std::vector<double> start{0.0, 1.0, -1.0};
  for (std::size_t i = 0; i < 3; ++i) {
    const double expected = start[i] - 50 * cfg.learning_rate * g[i] / (std::abs(g[i]) + cfg.epsilon);
    CHECK(std::abs(p.value[i] - expected) <= 1e-12);
  }
  CHECK(opt.step_count() == 50);
}

TEST_CASE("adam first step on a quadratic") {
  // f = x^2 at x = 3: g = 6, first step is -lr * 6 / (6 + eps).
  Parameter p("x", Tensor({1}, 3.0));
  Adam opt({&p}, AdamConfig{});
  p.grad[0] = 6.0;
  opt.step();
  CHECK(p.value[0] == doctest::Approx(3.0 - 2e-4 * 6.0 / (6.0 + 1e-8)).epsilon(1e-15));
}

TEST_CASE("rmsprop follows its recurrence") {
  Parameter p("p", Tensor({2}, std::vector<double>{1.0, -1.0}));
  RmspropConfig cfg;
  Rmsprop opt({&p}, cfg);
  const std::vector<double> grads{0.3, -0.7, 0.1, 2.0, -1.0};
  double x0 = 1.0, x1 = -1.0, v0 = 0.0, v1 = 0.0;
  for (double g : grads) {
    p.grad[0] = g;
    p.grad[1] = -g;
    opt.step();
    v0 = 0.9 * v0 + 0.1 * g * g;
    v1 = 0.9 * v1 + 0.1 * g * g;
    x0 -= cfg.learning_rate * g / (std::sqrt(v0) + cfg.epsilon);
    x1 -= cfg.learning_rate * -g / (std::sqrt(v1) + cfg.epsilon);
  }
  CHECK(p.value[0] == x0);
  CHECK(p.value[1] == x1);
}

TEST_CASE("optimizer refuses a NaN gradient and leaves weights alone") {
  Parameter a("alpha", Tensor({2}, 1.0));
  Parameter b("beta", Tensor({2}, 1.0));
  Adam opt({&a, &b}, AdamConfig{});
  b.grad[1] = std::nan("");
  try {
    opt.step();
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("beta") != std::string::npos);
  }
  CHECK(a.value[0] == 1.0);
  CHECK(opt.step_count() == 0);
}

TEST_CASE("zero_grad clears accumulators") {
  Parameter a("a", Tensor({2}, 1.0));
  Rmsprop opt({&a}, RmspropConfig{});
  a.grad.fill(3.0);
  opt.zero_grad();
  CHECK(a.grad[0] == 0.0);
}
