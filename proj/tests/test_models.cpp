#include <doctest.h>

#include <cmath>
#include <numbers>

#include "danmaku/error.hpp"
#include "danmaku/models.hpp"
#include "danmaku/ops.hpp"
#include "support.hpp"

using namespace danmaku;

namespace {

void zero_all(GanModel& m) {
  for (Parameter* p : m.parameters()) p->value.fill(0.0);
}

void check_constant(const ParametricSequence& s, double v) {
  for (const auto& row : s.rows())
    for (double x : row) REQUIRE(x == v);
}

std::size_t conv_params(const std::vector<std::size_t>& ch) {
  std::size_t n = 0;
  for (std::size_t i = 0; i + 1 < ch.size(); ++i) n += ch[i] * ch[i + 1] * 4 + ch[i + 1];
  return n;
}

std::size_t lstm_net_params(std::size_t in, std::size_t out, std::size_t h, std::size_t layers) {
  std::size_t n = 0;
  for (std::size_t l = 0; l < layers; ++l) n += 4 * h * ((l == 0 ? in : h) + h) + 4 * h;
  return n + h * out + out;
}

constexpr std::size_t kNoiseParams = 2 * ((16 * 32 + 32) + (32 * 16 + 16));

}  // namespace

TEST_CASE("length chains") {
  CHECK(Dcgan::generator_length_chain() == std::vector<std::size_t>{1, 4, 8, 16, 32, 64});
  CHECK(Dcgan::discriminator_length_chain() == std::vector<std::size_t>{64, 32, 16, 8, 4, 1});
  CHECK(Psgan::generator_length_chain() == std::vector<std::size_t>{10, 13, 28, 31, 64});
  CHECK(Psgan::discriminator_length_chain() == std::vector<std::size_t>{64, 31, 28, 13, 10});
  // 12 -> 15 -> 32 -> 35 -> 72 by (L-1)*s + k per layer.
  CHECK(Psgan::generator_length_chain(12) == std::vector<std::size_t>{12, 15, 32, 35, 72});
}

TEST_CASE("parameter counts follow the layer tables") {
  CHECK(Dcgan(1).parameter_count() == conv_params({100, 256, 128, 64, 32, 8}) + conv_params({8, 32, 64, 128, 256, 1}));
  CHECK(Psgan(1).parameter_count() ==
        kNoiseParams + conv_params({32, 128, 64, 32, 8}) + conv_params({8, 32, 64, 128, 1}));
  CHECK(Timegan(1).parameter_count() == kNoiseParams + lstm_net_params(8, 24, 128, 3) +
                                            lstm_net_params(24, 8, 128, 3) + lstm_net_params(32, 24, 128, 3) +
                                            lstm_net_params(24, 24, 128, 3) + lstm_net_params(24, 1, 128, 3));
}

TEST_CASE("generator output shapes and range") {
  Rng rng(4);
  for (auto kind : {ModelKind::dcgan, ModelKind::psgan}) {
    auto m = make_model(kind, 2);
    Tape tape;
    const Var x = m->generate_batch(Binder(tape, false), 3, rng);
    CHECK(x.shape() == Shape{3, 64, 8});
    for (double v : x.value().values()) REQUIRE((v > 0.0 && v < 1.0));
  }
  TimeganConfig small;
  small.hidden = 8;
  small.layers = 2;
  Timegan t(2, small);
  Tape tape;
  CHECK(t.generate_batch(Binder(tape, false), 2, rng).shape() == Shape{2, 64, 8});
  const Var x = tape.constant(Tensor({2, 64, 8}, 0.3));
  CHECK(t.embed(Binder(tape, false), x).shape() == Shape{2, 64, 24});
  CHECK(t.discriminator_logits(Binder(tape, false), t.embed(Binder(tape, false), x)).shape() == Shape{2, 64, 1});
}

TEST_CASE("all-zero weights give 0.5 everywhere") {
  Rng rng(8);
  Dcgan d(1);
  zero_all(d);
  check_constant(d.generate(1, rng)[0], 0.5);
  Psgan p(1);
  zero_all(p);
  check_constant(p.generate(1, rng)[0], 0.5);
  check_constant(p.generate_from_noise(make_noise(p.noise, 10, rng)), 0.5);
  TimeganConfig small;
  small.hidden = 6;
  small.layers = 2;
  Timegan t(1, small);
  zero_all(t);
  check_constant(t.generate(1, rng)[0], 0.5);

  const auto seq = Psgan(3).generate(1, rng)[0];
  CHECK(d.discriminate(seq) == 0.5);
  CHECK(p.discriminate(seq) == 0.5);
}

TEST_CASE("psgan rejects a noise length that does not give 64 rows") {
  Psgan p(1);
  Rng rng(1);
  CHECK_THROWS_AS(p.generate_from_noise(make_noise(p.noise, 12, rng)), ShapeError);
  CHECK_NOTHROW(p.generate_from_noise(make_noise(p.noise, 10, rng)));
  TimeganConfig bad;
  bad.noise_length = 32;
  CHECK_THROWS_AS(Timegan(1, bad), ShapeError);
}

TEST_CASE("discriminators reject malformed input") {
  Psgan p(1);
  Tape tape;
  CHECK_THROWS_AS(p.discriminator_logits(Binder(tape, false), tape.constant(Tensor({1, 64, 7}))), ShapeError);
}

TEST_CASE("periodic noise special cases") {
  Rng rng(3);
  PeriodicNoise noise("n", NoiseSpec{}, rng);
  for (Parameter* p : [&] {
         std::vector<Parameter*> v;
         noise.collect(v);
         return v;
       }())
    p->value.fill(0.0);
  Tensor z = make_noise(noise, 10, rng);
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = 16; j < 32; ++j) CHECK(z.at(i, j) == 0.0);

  noise.k2.second.bias.value.fill(0.7);
  z = make_noise(noise, 10, rng);
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = 16; j < 32; ++j) CHECK(z.at(i, j) == std::sin(0.7));

  noise.k2.second.bias.value.fill(0.3);
  noise.k1.second.bias.value.fill(std::numbers::pi / 2);
  z = make_noise(noise, 12, rng);
  for (std::size_t i = 0; i + 4 < 12; ++i)
    for (std::size_t j = 16; j < 32; ++j) CHECK(std::abs(z.at(i, j) - z.at(i + 4, j)) <= 1e-12);
}

TEST_CASE("checkpoint round trip restores generation exactly") {
  const auto dir = testing::scratch_dir("models");
  Psgan a(5);
  Rng perturb(9);
  for (Parameter* p : a.parameters())
    for (double& v : p->value.values()) v += 0.01 * perturb.normal();
  a.checkpoint(5, 42).save(dir / "p.bin");
  const auto ckpt = Checkpoint::load(dir / "p.bin");
  CHECK(ckpt.iteration == 42);
  const auto b = model_from_checkpoint(ckpt);
  Rng r1(1), r2(1);
  CHECK(a.generate(4, r1) == b->generate(4, r2));

  Dcgan d(1);
  CHECK_THROWS_AS(d.load(ckpt), ValidationError);
  std::string bytes = ckpt.serialize();
  bytes[0] = 'X';
  CHECK_THROWS_AS(Checkpoint::deserialize(bytes), ValidationError);
}

TEST_CASE("model names") {
  CHECK(parse_model("timegan") == ModelKind::timegan);
  CHECK(model_name(ModelKind::psgan) == "psgan");
  CHECK_THROWS_AS(parse_model("vae"), ValidationError);
}
