#include <doctest.h>

#include <cmath>

#include "danmaku/error.hpp"
#include "danmaku/ops.hpp"
#include "gradient_cases.hpp"
#include "support.hpp"

using namespace danmaku;
using testing::gradient_error;
using testing::param;
using testing::random_tensor;

TEST_CASE("tensor shape rules") {
  CHECK(shape_size({2, 3, 4}) == 24);
  CHECK(shape_size({}) == 1);
  CHECK_THROWS_AS(Tensor({2, 0}), ShapeError);
  CHECK_THROWS_AS(Tensor({2, 2}, std::vector<double>{1, 2, 3}), ShapeError);
  Tensor t({2, 3}, 1.5);
  CHECK(t.at(1, 2) == 1.5);
  CHECK_THROWS_AS(t.reshaped({4}), ShapeError);
  CHECK(t.reshaped({3, 2}).shape() == Shape{3, 2});
}

TEST_CASE("tape: gradients accumulate across uses and reach parameters") {
  Parameter a("a", Tensor({2}, std::vector<double>{1.0, -2.0}));
  Tape tape;
  Var x = tape.parameter(a);
  // loss = sum(x*x + 3x) -> grad 2x + 3
  Var loss = ops::sum(ops::add(ops::mul(x, x), ops::scale(x, 3.0)));
  tape.backward(loss);
  CHECK(a.grad[0] == doctest::Approx(5.0));
  CHECK(a.grad[1] == doctest::Approx(-1.0));
}

TEST_CASE("tape: second backward on the same recording is rejected") {
  Parameter a("a", Tensor({1}, 2.0));
  Tape tape;
  Var loss = ops::sum(ops::mul(tape.parameter(a), tape.parameter(a)));
  tape.backward(loss);
  CHECK_THROWS_AS(tape.backward(loss), Error);
  tape.clear();
  CHECK(tape.size() == 0);
}

TEST_CASE("tape: non-scalar loss is rejected") {
  Parameter a("a", Tensor({3}, 1.0));
  Tape tape;
  CHECK_THROWS_AS(tape.backward(tape.parameter(a)), ShapeError);
}

TEST_CASE("tape: frozen parameters get no gradient") {
  Parameter a("a", Tensor({2}, 1.0));
  Parameter b("b", Tensor({2}, 3.0));
  Tape tape;
  tape.backward(ops::sum(ops::mul(tape.parameter(a), tape.frozen(b))));
  CHECK(a.grad[0] == 3.0);
  CHECK(b.grad[0] == 0.0);
  CHECK(b.grad[1] == 0.0);
}

TEST_CASE("tape: NaN produced by an op is reported") {
  Tape tape;
  Var x = tape.constant(Tensor({1}, std::nan("")));
  CHECK_THROWS_AS(ops::scale(x, 2.0), NumericError);
}

TEST_CASE("conv output lengths") {
  CHECK(ops::conv1d_output_length(64, 4, 2, 1) == 32);
  CHECK(ops::conv1d_output_length(4, 4, 1, 0) == 1);
  CHECK(ops::conv1d_transpose_output_length(1, 4, 1, 0) == 4);
  CHECK(ops::conv1d_transpose_output_length(13, 4, 2, 0) == 28);
  CHECK_THROWS_AS(ops::conv1d_output_length(2, 4, 1, 0), ShapeError);
}

TEST_CASE("conv1d on a hand example") {
  // x = [1 2 3 4], w = [1 -1], stride 1 -> [-1 -1 -1]; stride 2 -> [-1 -1]
  Tape tape;
  Var x = tape.constant(Tensor({1, 1, 4}, std::vector<double>{1, 2, 3, 4}));
  Var w = tape.constant(Tensor({1, 1, 2}, std::vector<double>{1, -1}));
  CHECK(ops::conv1d(x, w, Var{}, 1, 0).value().values()[2] == -1.0);
  CHECK(ops::conv1d(x, w, Var{}, 2, 0).value().shape() == Shape{1, 1, 2});
  // padding 1: [0 1 2 3 4 0] -> [-1 -1 -1 -1 -1 4]? positions 0..4 -> 5 outputs
  const Tensor padded = ops::conv1d(x, w, Var{}, 1, 1).value();
  CHECK(padded.shape() == Shape{1, 1, 5});
  CHECK(padded[0] == -1.0);
  CHECK(padded[4] == 4.0);
}

TEST_CASE("conv1d_transpose is the adjoint of conv1d") {
  // <conv(x), y> == <x, convT(y)> with the same weights and no bias.
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    Rng rng(seed);
    const std::size_t b = testing::pick(rng, 1, 3), cin = testing::pick(rng, 1, 4), cout = testing::pick(rng, 1, 4);
    const std::size_t k = testing::pick(rng, 1, 5), s = testing::pick(rng, 1, 3), pad = testing::pick(rng, 0, k - 1);
    const std::size_t len = k + testing::pick(rng, 0, 9);
    Tape tape;
    const Tensor w = random_tensor({cout, cin, k}, rng);
    Var x = tape.constant(random_tensor({b, cin, len}, rng));
    Var y0 = ops::conv1d(x, tape.constant(w), Var{}, s, pad);
    Var y = tape.constant(random_tensor(y0.shape(), rng));
    Var back = ops::conv1d_transpose(y, tape.constant(w.reshaped({cout, cin, k})), Var{}, s, pad);
    if (back.shape() != x.shape()) {
      // Transposed output can be shorter than the input when stride does
      // not divide; compare on the overlapping prefix only.
      CHECK(back.shape()[2] <= x.shape()[2]);
      continue;
    }
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < y.value().size(); ++i) lhs += y0.value()[i] * y.value()[i];
    for (std::size_t i = 0; i < x.value().size(); ++i) rhs += x.value()[i] * back.value()[i];
    CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(lhs)));
  }
}

TEST_CASE("lstm_layer matches a hand-unrolled cell") {
  Rng rng(11);
  const std::size_t B = 2, T = 3, D = 2, H = 3;
  const Tensor x = random_tensor({B, T, D}, rng), wih = random_tensor({4 * H, D}, rng),
               whh = random_tensor({4 * H, H}, rng), bias = random_tensor({4 * H}, rng);
  Tape tape;
  const Tensor out =
      ops::lstm_layer(tape.constant(x), tape.constant(wih), tape.constant(whh), tape.constant(bias)).value();
  auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  for (std::size_t b = 0; b < B; ++b) {
    std::vector<double> h(H, 0.0), c(H, 0.0);
    for (std::size_t t = 0; t < T; ++t) {
      std::vector<double> z(4 * H);
      for (std::size_t r = 0; r < 4 * H; ++r) {
        z[r] = bias[r];
        for (std::size_t d = 0; d < D; ++d) z[r] += wih.at(r, d) * x.at(b, t, d);
        for (std::size_t j = 0; j < H; ++j) z[r] += whh.at(r, j) * h[j];
      }
      for (std::size_t j = 0; j < H; ++j) {
        const double i = sig(z[j]), f = sig(z[H + j]), g = std::tanh(z[2 * H + j]), o = sig(z[3 * H + j]);
        c[j] = f * c[j] + i * g;
        h[j] = o * std::tanh(c[j]);
        CHECK(std::abs(out.at(b, t, j) - h[j]) <= 1e-12);
      }
    }
  }
}

TEST_CASE("layer gradients match central differences") {
  for (const auto& c : testing::layer_gradient_cases()) {
    CAPTURE(c.name);
    CHECK(c.run(20, 2024) <= 1e-6);
  }
}

TEST_CASE("remaining op gradients match central differences") {
  Rng rng(7);
  auto check = [](std::vector<Parameter> ps, const testing::LossFn& fn) { CHECK(gradient_error(ps, fn) <= 1e-6); };
  for (int n = 0; n < 5; ++n) {
    Rng pr = rng.fork(100 + n);
    auto probed = [pr](Var v) {
      Rng r = pr;
      return testing::probe(v, r);
    };
    check({param("a", {2, 3}, rng), param("b", {2, 3}, rng)},
          [&](Tape&, std::vector<Var>& v) { return probed(ops::sub(ops::add(v[0], v[1]), ops::mul(v[0], v[1]))); });
    check({param("a", {3, 2}, rng), param("b", {2, 4}, rng)},
          [&](Tape&, std::vector<Var>& v) { return probed(ops::matmul(v[0], v[1])); });
    check({param("a", {2, 3, 4}, rng)}, [&](Tape&, std::vector<Var>& v) {
      return probed(ops::time_slice(ops::swap_last_axes(ops::sin(v[0])), 1, 3));
    });
    check({param("a", {2, 5}, rng)}, [&](Tape&, std::vector<Var>& v) { return ops::mean(ops::scale(v[0], -1.5)); });
    const Tensor global = random_tensor({2, 3}, rng);
    check({param("f", {2, 4}, rng), param("p", {2, 4}, rng)},
          [&](Tape&, std::vector<Var>& v) { return probed(ops::periodic_noise(global, v[0], v[1], 5)); });
  }
}

TEST_CASE("binary cross-entropy values") {
  Tape tape;
  Var p = tape.constant(Tensor({2}, std::vector<double>{0.5, 0.25}));
  const double expected = (std::log(2.0) - std::log(0.75)) / 2.0;  // targets 1, 0
  CHECK(ops::binary_cross_entropy(p, Tensor({2}, std::vector<double>{1.0, 0.0})).value()[0] ==
        doctest::Approx(expected).epsilon(1e-14));
  Var z = tape.constant(Tensor({1}, 0.0));
  CHECK(ops::bce_with_logits(z, Tensor({1}, 1.0)).value()[0] == doctest::Approx(std::log(2.0)));
  // Large logits stay finite.
  Var big = tape.constant(Tensor({1}, 800.0));
  CHECK(ops::bce_with_logits(big, Tensor({1}, 0.0)).value()[0] == doctest::Approx(800.0));
}

TEST_CASE("shape errors name the op") {
  Tape tape;
  Var a = tape.constant(Tensor({2, 3}));
  Var b = tape.constant(Tensor({2, 2}));
  CHECK_THROWS_AS(ops::add(a, b), ShapeError);
  CHECK_THROWS_AS(ops::matmul(a, b), ShapeError);
  CHECK_THROWS_AS(ops::conv1d(tape.constant(Tensor({1, 2, 8})), tape.constant(Tensor({1, 3, 2})), Var{}, 1, 0),
                  ShapeError);
}
