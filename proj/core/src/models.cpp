#include "danmaku/models.hpp"

#include <algorithm>
#include <array>
#include <type_traits>
#include <string>

#include "danmaku/error.hpp"
#include "danmaku/ops.hpp"

namespace danmaku {
namespace {

constexpr std::size_t kGenerateChunk = 32;

std::vector<ParametricSequence> split_sequences(const Tensor& batch) {
  std::vector<ParametricSequence> out;
  const std::size_t n = batch.dim(0);
  const std::size_t stride = kSequenceLength * kFeatureDims;
  for (std::size_t b = 0; b < n; ++b) {
    std::vector<double> vals(batch.data() + b * stride, batch.data() + (b + 1) * stride);
    out.push_back(ParametricSequence::from_tensor(Tensor({kSequenceLength, kFeatureDims}, std::move(vals))));
  }
  return out;
}

void check_length_chain(const char* what, const std::vector<std::size_t>& chain, std::size_t expected_end) {
  if (chain.back() != expected_end) {
    throw ShapeError(std::string(what) + ": length chain ends at " + std::to_string(chain.back()) + ", expected " +
                     std::to_string(expected_end));
  }
}

template <class Layer>
std::vector<std::size_t> chain_of(std::size_t length, const std::vector<std::array<std::size_t, 3>>& geometry) {
  std::vector<std::size_t> chain{length};
  for (const auto& [k, s, p] : geometry) {
    if constexpr (std::is_same_v<Layer, ConvTranspose1d>) {
      chain.push_back(ops::conv1d_transpose_output_length(chain.back(), k, s, p));
    } else {
      chain.push_back(ops::conv1d_output_length(chain.back(), k, s, p));
    }
  }
  return chain;
}

// (kernel, stride, padding) per layer.
const std::vector<std::array<std::size_t, 3>> kDcganGen{{4, 1, 0}, {4, 2, 1}, {4, 2, 1}, {4, 2, 1}, {4, 2, 1}};
const std::vector<std::array<std::size_t, 3>> kDcganDisc{{4, 2, 1}, {4, 2, 1}, {4, 2, 1}, {4, 2, 1}, {4, 1, 0}};
const std::vector<std::size_t> kDcganGenChannels{Dcgan::kLatent, 256, 128, 64, 32, kFeatureDims};
const std::vector<std::size_t> kDcganDiscChannels{kFeatureDims, 32, 64, 128, 256, 1};

const std::vector<std::array<std::size_t, 3>> kPsganGen{{4, 1, 0}, {4, 2, 0}, {4, 1, 0}, {4, 2, 0}};
const std::vector<std::array<std::size_t, 3>> kPsganDisc{{4, 2, 0}, {4, 1, 0}, {4, 2, 0}, {4, 1, 0}};
const std::vector<std::size_t> kPsganGenChannels{32, 128, 64, 32, kFeatureDims};
const std::vector<std::size_t> kPsganDiscChannels{kFeatureDims, 32, 64, 128, 1};

}  // namespace

std::string_view model_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::dcgan: return "dcgan";
    case ModelKind::psgan: return "psgan";
    case ModelKind::timegan: return "timegan";
  }
  return "?";
}

ModelKind parse_model(std::string_view name) {
  if (name == "dcgan") return ModelKind::dcgan;
  if (name == "psgan") return ModelKind::psgan;
  if (name == "timegan") return ModelKind::timegan;
  throw ValidationError("unknown model '" + std::string(name) + "' (expected dcgan, psgan or timegan)");
}

// ---------------------------------------------------------------- noise

PeriodicNoise::PeriodicNoise(const std::string& name, NoiseSpec spec, Rng& rng)
    : k1(name + ".k1", spec.global_dim, spec.mlp_hidden, spec.periodic_dim, rng),
      k2(name + ".k2", spec.global_dim, spec.mlp_hidden, spec.periodic_dim, rng),
      spec_(spec) {}

Tensor PeriodicNoise::sample_global(std::size_t batch, Rng& rng) const {
  Tensor g({batch, spec_.global_dim});
  for (double& v : g.values()) v = rng.normal();
  return g;
}

Var PeriodicNoise::forward(const Binder& bind, const Tensor& global, std::size_t length) const {
  Var g = bind.tape().constant(global);
  return ops::periodic_noise(global, k1.forward(bind, g), k2.forward(bind, g), length);
}

void PeriodicNoise::collect(std::vector<Parameter*>& out) {
  k1.collect(out);
  k2.collect(out);
}

Tensor make_noise(const PeriodicNoise& noise, std::size_t length, Rng& rng) {
  if (length == 0) throw ValidationError("make_noise: spatial length must be at least 1");
  Tape tape;
  Binder bind(tape, false);
  const Var z = noise.forward(bind, noise.sample_global(1, rng), length);
  return z.value().reshaped({length, noise.spec().width()});
}

// ---------------------------------------------------------------- base

std::vector<const Parameter*> GanModel::parameters() const {
  auto params = const_cast<GanModel*>(this)->parameters();
  return {params.begin(), params.end()};
}

std::vector<ParametricSequence> GanModel::generate(std::size_t count, Rng& rng) const {
  std::vector<ParametricSequence> out;
  out.reserve(count);
  while (out.size() < count) {
    const std::size_t n = std::min(kGenerateChunk, count - out.size());
    Tape tape;
    const Var x = generate_batch(Binder(tape, false), n, rng);
    for (auto& s : split_sequences(x.value())) out.push_back(std::move(s));
  }
  return out;
}

std::size_t GanModel::parameter_count() const {
  std::size_t n = 0;
  for (const Parameter* p : parameters()) n += p->value.size();
  return n;
}

Checkpoint GanModel::checkpoint(std::uint64_t seed, std::uint64_t iteration) {
  const auto params = parameters();
  Checkpoint c = Checkpoint::capture(std::string(model_name(kind())), seed, iteration, params);
  if (const auto* t = dynamic_cast<const Timegan*>(this)) {
    c.meta["hidden"] = std::to_string(t->config().hidden);
    c.meta["layers"] = std::to_string(t->config().layers);
    c.meta["latent"] = std::to_string(t->config().latent);
  }
  return c;
}

void GanModel::load(const Checkpoint& ckpt) {
  if (ckpt.architecture != model_name(kind())) {
    throw ValidationError("checkpoint architecture '" + ckpt.architecture + "' does not match model '" +
                          std::string(model_name(kind())) + "'");
  }
  const auto params = parameters();
  ckpt.restore(params);
}

// ---------------------------------------------------------------- DCGAN

Dcgan::Dcgan(std::uint64_t seed) {
  Rng rng = Rng(seed).fork(0x6463);
  for (std::size_t i = 0; i < kDcganGen.size(); ++i) {
    const auto& [k, s, p] = kDcganGen[i];
    generator.emplace_back("g.convt" + std::to_string(i), kDcganGenChannels[i], kDcganGenChannels[i + 1], k, s, p,
                           rng);
  }
  for (std::size_t i = 0; i < kDcganDisc.size(); ++i) {
    const auto& [k, s, p] = kDcganDisc[i];
    discriminator.emplace_back("d.conv" + std::to_string(i), kDcganDiscChannels[i], kDcganDiscChannels[i + 1], k, s,
                               p, rng);
  }
  check_length_chain("dcgan generator", generator_length_chain(), kSequenceLength);
  check_length_chain("dcgan discriminator", discriminator_length_chain(), 1);
}

std::vector<std::size_t> Dcgan::generator_length_chain() { return chain_of<ConvTranspose1d>(1, kDcganGen); }
std::vector<std::size_t> Dcgan::discriminator_length_chain() { return chain_of<Conv1d>(kSequenceLength, kDcganDisc); }

std::vector<Parameter*> Dcgan::generator_parameters() {
  std::vector<Parameter*> out;
  for (auto& l : generator) l.collect(out);
  return out;
}

std::vector<Parameter*> Dcgan::discriminator_parameters() {
  std::vector<Parameter*> out;
  for (auto& l : discriminator) l.collect(out);
  return out;
}

std::vector<Parameter*> Dcgan::parameters() {
  auto out = generator_parameters();
  for (Parameter* p : discriminator_parameters()) out.push_back(p);
  return out;
}

Var Dcgan::generator_forward(const Binder& bind, Var z) const {
  Var h = z;
  for (std::size_t i = 0; i < generator.size(); ++i) {
    h = generator[i].forward(bind, h);
    h = i + 1 < generator.size() ? ops::relu(h) : ops::logistic(h);
  }
  return h;
}

Var Dcgan::discriminator_logits(const Binder& bind, Var x) const {
  Var h = ops::swap_last_axes(x);
  for (std::size_t i = 0; i < discriminator.size(); ++i) {
    h = discriminator[i].forward(bind, h);
    if (i + 1 < discriminator.size()) h = ops::relu(h);
  }
  return h;
}

Var Dcgan::generate_batch(const Binder& bind, std::size_t batch, Rng& rng) const {
  Tensor z({batch, kLatent, 1});
  for (double& v : z.values()) v = rng.normal();
  return ops::swap_last_axes(generator_forward(bind, bind.tape().constant(std::move(z))));
}

double Dcgan::discriminate(const ParametricSequence& seq) const {
  Tape tape;
  Binder bind(tape, false);
  const Var x = tape.constant(seq.to_tensor().reshaped({1, kSequenceLength, kFeatureDims}));
  return ops::logistic(discriminator_logits(bind, x)).value()[0];
}

// ---------------------------------------------------------------- PSGAN

Psgan::Psgan(std::uint64_t seed) {
  Rng rng = Rng(seed).fork(0x7073);
  noise = PeriodicNoise("g.noise", NoiseSpec{}, rng);
  for (std::size_t i = 0; i < kPsganGen.size(); ++i) {
    const auto& [k, s, p] = kPsganGen[i];
    generator.emplace_back("g.convt" + std::to_string(i), kPsganGenChannels[i], kPsganGenChannels[i + 1], k, s, p,
                           rng);
  }
  for (std::size_t i = 0; i < kPsganDisc.size(); ++i) {
    const auto& [k, s, p] = kPsganDisc[i];
    discriminator.emplace_back("d.conv" + std::to_string(i), kPsganDiscChannels[i], kPsganDiscChannels[i + 1], k, s,
                               p, rng);
  }
  check_length_chain("psgan generator", generator_length_chain(), kSequenceLength);
  check_length_chain("psgan discriminator", discriminator_length_chain(), kNoiseLength);
}

std::vector<std::size_t> Psgan::generator_length_chain(std::size_t noise_length) {
  return chain_of<ConvTranspose1d>(noise_length, kPsganGen);
}
std::vector<std::size_t> Psgan::discriminator_length_chain() { return chain_of<Conv1d>(kSequenceLength, kPsganDisc); }

std::vector<Parameter*> Psgan::generator_parameters() {
  std::vector<Parameter*> out;
  noise.collect(out);
  for (auto& l : generator) l.collect(out);
  return out;
}

std::vector<Parameter*> Psgan::discriminator_parameters() {
  std::vector<Parameter*> out;
  for (auto& l : discriminator) l.collect(out);
  return out;
}

std::vector<Parameter*> Psgan::parameters() {
  auto out = generator_parameters();
  for (Parameter* p : discriminator_parameters()) out.push_back(p);
  return out;
}

Var Psgan::generator_forward(const Binder& bind, Var z) const {
  Var h = ops::swap_last_axes(z);
  for (std::size_t i = 0; i < generator.size(); ++i) {
    h = generator[i].forward(bind, h);
    h = i + 1 < generator.size() ? ops::relu(h) : ops::logistic(h);
  }
  return h;
}

Var Psgan::discriminator_logits(const Binder& bind, Var x) const {
  Var h = ops::swap_last_axes(x);
  for (std::size_t i = 0; i < discriminator.size(); ++i) {
    h = discriminator[i].forward(bind, h);
    if (i + 1 < discriminator.size()) h = ops::relu(h);
  }
  return h;
}

Var Psgan::generate_batch(const Binder& bind, std::size_t batch, Rng& rng) const {
  const Var z = noise.forward(bind, noise.sample_global(batch, rng), kNoiseLength);
  return ops::swap_last_axes(generator_forward(bind, z));
}

ParametricSequence Psgan::generate_from_noise(const Tensor& z) const {
  if (z.rank() != 2 || z.dim(1) != noise.spec().width()) {
    throw ShapeError("psgan: noise must be [length x " + std::to_string(noise.spec().width()) + "], got " +
                     shape_string(z.shape()));
  }
  const std::size_t out_len = generator_length_chain(z.dim(0)).back();
  if (out_len != kSequenceLength) {
    throw ShapeError("psgan: noise spatial length " + std::to_string(z.dim(0)) + " yields sequence length " +
                     std::to_string(out_len) + ", expected 64");
  }
  Tape tape;
  Binder bind(tape, false);
  const Var x = ops::swap_last_axes(generator_forward(bind, tape.constant(z.reshaped({1, z.dim(0), z.dim(1)}))));
  return ParametricSequence::from_tensor(x.value());
}

double Psgan::discriminate(const ParametricSequence& seq) const {
  Tape tape;
  Binder bind(tape, false);
  const Var x = tape.constant(seq.to_tensor().reshaped({1, kSequenceLength, kFeatureDims}));
  return ops::mean(ops::logistic(discriminator_logits(bind, x))).value()[0];
}

// ---------------------------------------------------------------- TimeGAN

RecurrentNet::RecurrentNet(const std::string& name, std::size_t in, std::size_t out, std::size_t hidden,
                           std::size_t layers, Rng& rng)
    : lstm(name, in, hidden, layers, rng), head(name + ".head", hidden, out, rng) {}

Var RecurrentNet::logits(const Binder& bind, Var x) const { return head.forward(bind, lstm.forward(bind, x)); }

Var RecurrentNet::forward(const Binder& bind, Var x) const { return ops::logistic(logits(bind, x)); }

void RecurrentNet::collect(std::vector<Parameter*>& out) {
  lstm.collect(out);
  head.collect(out);
}

Timegan::Timegan(std::uint64_t seed, TimeganConfig config) : config_(config) {
  if (config.noise_length != kSequenceLength) {
    throw ShapeError("timegan: noise length must equal the sequence length (64), got " +
                     std::to_string(config.noise_length));
  }
  Rng rng = Rng(seed).fork(0x7467);
  NoiseSpec spec;
  spec.length = config.noise_length;
  noise = PeriodicNoise("g.noise", spec, rng);
  const std::size_t H = config.hidden, L = config.layers, Z = config.latent;
  embedder = RecurrentNet("e", kFeatureDims, Z, H, L, rng);
  reconstructor = RecurrentNet("r", Z, kFeatureDims, H, L, rng);
  generator = RecurrentNet("g", spec.width(), Z, H, L, rng);
  supervisor = RecurrentNet("s", Z, Z, H, L, rng);
  discriminator = RecurrentNet("d", Z, 1, H, L, rng);
}

std::vector<Parameter*> Timegan::autoencoder_parameters() {
  std::vector<Parameter*> out;
  embedder.collect(out);
  reconstructor.collect(out);
  return out;
}

std::vector<Parameter*> Timegan::generator_parameters() {
  std::vector<Parameter*> out;
  noise.collect(out);
  generator.collect(out);
  supervisor.collect(out);
  return out;
}

std::vector<Parameter*> Timegan::discriminator_parameters() {
  std::vector<Parameter*> out;
  discriminator.collect(out);
  return out;
}

std::vector<Parameter*> Timegan::parameters() {
  auto out = autoencoder_parameters();
  for (Parameter* p : generator_parameters()) out.push_back(p);
  for (Parameter* p : discriminator_parameters()) out.push_back(p);
  return out;
}

Var Timegan::embed(const Binder& bind, Var x) const { return embedder.forward(bind, x); }
Var Timegan::reconstruct(const Binder& bind, Var h) const { return reconstructor.forward(bind, h); }
Var Timegan::generate_latent(const Binder& bind, Var z) const { return generator.forward(bind, z); }
Var Timegan::supervise(const Binder& bind, Var h) const { return supervisor.forward(bind, h); }
Var Timegan::discriminator_logits(const Binder& bind, Var h) const { return discriminator.logits(bind, h); }

Var Timegan::generate_batch(const Binder& bind, std::size_t batch, Rng& rng) const {
  const Var z = noise.forward(bind, noise.sample_global(batch, rng), config_.noise_length);
  return reconstruct(bind, supervise(bind, generate_latent(bind, z)));
}

ParametricSequence Timegan::generate_from_noise(const Tensor& z) const {
  if (z.rank() != 2 || z.dim(0) != config_.noise_length || z.dim(1) != noise.spec().width()) {
    throw ShapeError("timegan: noise must be [64 x " + std::to_string(noise.spec().width()) + "], got " +
                     shape_string(z.shape()));
  }
  Tape tape;
  Binder bind(tape, false);
  const Var e = generate_latent(bind, tape.constant(z.reshaped({1, z.dim(0), z.dim(1)})));
  return ParametricSequence::from_tensor(reconstruct(bind, supervise(bind, e)).value());
}

// ---------------------------------------------------------------- factory

std::unique_ptr<GanModel> make_model(ModelKind kind, std::uint64_t seed) {
  switch (kind) {
    case ModelKind::dcgan: return std::make_unique<Dcgan>(seed);
    case ModelKind::psgan: return std::make_unique<Psgan>(seed);
    case ModelKind::timegan: return std::make_unique<Timegan>(seed);
  }
  throw ValidationError("unknown model kind");
}

std::unique_ptr<GanModel> model_from_checkpoint(const Checkpoint& ckpt) {
  const ModelKind kind = parse_model(ckpt.architecture);
  std::unique_ptr<GanModel> model;
  if (kind == ModelKind::timegan) {
    TimeganConfig cfg;
    auto read = [&](const char* key, std::size_t fallback) {
      auto it = ckpt.meta.find(key);
      return it == ckpt.meta.end() ? fallback : static_cast<std::size_t>(std::stoull(it->second));
    };
    cfg.hidden = read("hidden", cfg.hidden);
    cfg.layers = read("layers", cfg.layers);
    cfg.latent = read("latent", cfg.latent);
    model = std::make_unique<Timegan>(ckpt.seed, cfg);
  } else {
    model = make_model(kind, ckpt.seed);
  }
  model->load(ckpt);
  return model;
}

}  // namespace danmaku
