#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string_view>
#include <vector>

#include "danmaku/checkpoint.hpp"
#include "danmaku/codec.hpp"
#include "danmaku/layers.hpp"

namespace danmaku {

enum class ModelKind { dcgan, psgan, timegan };

std::string_view model_name(ModelKind kind);
/// Throws ValidationError for anything but dcgan / psgan / timegan.
ModelKind parse_model(std::string_view name);

/// Global + periodic noise layout.
struct NoiseSpec {
  std::size_t global_dim = 16;
  std::size_t periodic_dim = 16;
  std::size_t length = 10;
  std::size_t mlp_hidden = 32;

  std::size_t width() const { return global_dim + periodic_dim; }
};

/// Noise source shared by the periodic spatial GAN and the TimeGAN: the
/// global vector is drawn once per sample and repeated on every row; the
/// periodic half of row i is sin(i * K1(global) + K2(global)).
class PeriodicNoise {
 public:
  PeriodicNoise() = default;
  PeriodicNoise(const std::string& name, NoiseSpec spec, Rng& rng);

  const NoiseSpec& spec() const { return spec_; }

  /// [batch, global_dim] standard normal draws.
  Tensor sample_global(std::size_t batch, Rng& rng) const;
  /// [batch, length, width]
  Var forward(const Binder& bind, const Tensor& global, std::size_t length) const;

  Mlp k1;
  Mlp k2;

  void collect(std::vector<Parameter*>& out);

 private:
  NoiseSpec spec_;
};

/// One noise draw, [length, width], with frozen weights.
Tensor make_noise(const PeriodicNoise& noise, std::size_t length, Rng& rng);

/// Common interface of the three generators.
class GanModel {
 public:
  virtual ~GanModel() = default;

  virtual ModelKind kind() const = 0;
  /// Every trainable tensor, in checkpoint order.
  virtual std::vector<Parameter*> parameters() = 0;
  std::vector<const Parameter*> parameters() const;

  /// Generated sequences as [batch, 64, 8] probabilities; binds weights
  /// through `bind` so callers can train or freeze them.
  virtual Var generate_batch(const Binder& bind, std::size_t batch, Rng& rng) const = 0;

  /// Samples `count` sequences with frozen weights. Safe to call
  /// concurrently from several threads.
  std::vector<ParametricSequence> generate(std::size_t count, Rng& rng) const;

  std::size_t parameter_count() const;

  Checkpoint checkpoint(std::uint64_t seed, std::uint64_t iteration);
  void load(const Checkpoint& ckpt);
};

/// Five transposed-convolution layers: 100 -> 256 -> 128 -> 64 -> 32 -> 8
/// channels, lengths 1 -> 4 -> 8 -> 16 -> 32 -> 64. The discriminator
/// mirrors it with strided convolutions down to one logit.
class Dcgan final : public GanModel {
 public:
  static constexpr std::size_t kLatent = 100;

  explicit Dcgan(std::uint64_t seed);

  ModelKind kind() const override { return ModelKind::dcgan; }
  using GanModel::parameters;
  std::vector<Parameter*> parameters() override;
  std::vector<Parameter*> generator_parameters();
  std::vector<Parameter*> discriminator_parameters();

  /// z: [B, 100, 1] -> [B, 8, 64] probabilities.
  Var generator_forward(const Binder& bind, Var z) const;
  /// x: [B, 64, 8] sequences -> [B, 1, 1] logits.
  Var discriminator_logits(const Binder& bind, Var x) const;

  Var generate_batch(const Binder& bind, std::size_t batch, Rng& rng) const override;

  /// Probability that a sequence is real.
  double discriminate(const ParametricSequence& seq) const;

  static std::vector<std::size_t> generator_length_chain();
  static std::vector<std::size_t> discriminator_length_chain();

  std::vector<ConvTranspose1d> generator;
  std::vector<Conv1d> discriminator;
};

/// Periodic spatial GAN: noise of spatial length 10 through four unpadded
/// transposed convolutions, (kernel, stride) = (4,1), (4,2), (4,1), (4,2),
/// giving lengths 10 -> 13 -> 28 -> 31 -> 64. The discriminator mirrors it
/// and averages ten per-position scores.
class Psgan final : public GanModel {
 public:
  static constexpr std::size_t kNoiseLength = 10;

  explicit Psgan(std::uint64_t seed);

  ModelKind kind() const override { return ModelKind::psgan; }
  using GanModel::parameters;
  std::vector<Parameter*> parameters() override;
  std::vector<Parameter*> generator_parameters();
  std::vector<Parameter*> discriminator_parameters();

  /// noise: [B, L, 32] -> [B, 8, L'] probabilities.
  Var generator_forward(const Binder& bind, Var noise) const;
  /// x: [B, 64, 8] -> per-position logits [B, 1, 10].
  Var discriminator_logits(const Binder& bind, Var x) const;

  Var generate_batch(const Binder& bind, std::size_t batch, Rng& rng) const override;

  /// One sequence from a [10, 32] noise draw. Any other spatial length is
  /// rejected because it cannot produce 64 steps.
  ParametricSequence generate_from_noise(const Tensor& noise) const;

  /// Mean of the per-position probabilities.
  double discriminate(const ParametricSequence& seq) const;

  static std::vector<std::size_t> generator_length_chain(std::size_t noise_length = kNoiseLength);
  static std::vector<std::size_t> discriminator_length_chain();

  PeriodicNoise noise;
  std::vector<ConvTranspose1d> generator;
  std::vector<Conv1d> discriminator;
};

/// Stacked-LSTM network with a logistic (or raw, for logits) output head.
struct RecurrentNet {
  LstmStack lstm;
  Linear head;

  RecurrentNet() = default;
  RecurrentNet(const std::string& name, std::size_t in, std::size_t out, std::size_t hidden, std::size_t layers,
               Rng& rng);
  Var logits(const Binder& bind, Var x) const;
  Var forward(const Binder& bind, Var x) const;
  void collect(std::vector<Parameter*>& out);
};

struct TimeganConfig {
  std::size_t hidden = 128;
  std::size_t layers = 3;
  std::size_t latent = 24;
  std::size_t noise_length = kSequenceLength;
};

/// Embedder / reconstructor autoencoder, generator and supervisor in the
/// latent space, and a per-step latent discriminator.
class Timegan final : public GanModel {
 public:
  explicit Timegan(std::uint64_t seed, TimeganConfig config = {});

  ModelKind kind() const override { return ModelKind::timegan; }
  const TimeganConfig& config() const { return config_; }

  using GanModel::parameters;
  std::vector<Parameter*> parameters() override;
  std::vector<Parameter*> autoencoder_parameters();
  std::vector<Parameter*> generator_parameters();  ///< noise MLPs, generator and supervisor
  std::vector<Parameter*> discriminator_parameters();

  /// [B, 64, 8] -> [B, 64, latent]
  Var embed(const Binder& bind, Var x) const;
  /// [B, 64, latent] -> [B, 64, 8]
  Var reconstruct(const Binder& bind, Var h) const;
  /// noise [B, 64, 32] -> latent [B, 64, latent] before supervision.
  Var generate_latent(const Binder& bind, Var noise) const;
  Var supervise(const Binder& bind, Var h) const;
  /// Per-step logits [B, 64, 1].
  Var discriminator_logits(const Binder& bind, Var h) const;

  Var generate_batch(const Binder& bind, std::size_t batch, Rng& rng) const override;

  /// noise [64, 32] -> sequence via generator, supervisor and reconstructor.
  ParametricSequence generate_from_noise(const Tensor& noise) const;

  PeriodicNoise noise;
  RecurrentNet embedder;
  RecurrentNet reconstructor;
  RecurrentNet generator;
  RecurrentNet supervisor;
  RecurrentNet discriminator;

 private:
  TimeganConfig config_;
};

std::unique_ptr<GanModel> make_model(ModelKind kind, std::uint64_t seed);
/// Builds the architecture named in the checkpoint header and loads weights.
std::unique_ptr<GanModel> model_from_checkpoint(const Checkpoint& ckpt);

}  // namespace danmaku
