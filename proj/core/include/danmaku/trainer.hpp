#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "danmaku/corpus.hpp"
#include "danmaku/metrics.hpp"
#include "danmaku/models.hpp"
#include "danmaku/optim.hpp"

namespace danmaku {

struct TrainConfig {
  ModelKind model = ModelKind::psgan;
  std::size_t batch_size = 12;
  double learning_rate = 2e-4;
  /// Adversarial iterations; one discriminator plus one generator update each.
  std::size_t iterations = 5000;
  /// TimeGAN only: autoencoder pretraining and supervised-only phases.
  std::size_t pretrain_iterations = 5000;
  std::size_t supervised_iterations = 500;
  bool skip_pretraining = false;
  std::size_t eval_every = 20;
  std::size_t eval_samples = 30;
  std::uint64_t seed = 0;
  double eta = 1.0;     ///< supervised-loss weight in the TimeGAN generator loss
  double lambda = 0.1;  ///< supervised-loss weight in the TimeGAN embedder loss
  double augment_scale = kDefaultAugmentScale;
  std::size_t workers = 1;
  /// Where to dump the model if training hits a NaN; empty disables.
  std::filesystem::path diagnostics_path;

  /// Batch 12; Adam at 2e-4 for dcgan/psgan, RMSprop at 2e-3 for timegan;
  /// 5000 adversarial iterations (+5000 pretrain, +500 supervised).
  static TrainConfig defaults(ModelKind model);
  OptimizerKind optimizer() const { return model == ModelKind::timegan ? OptimizerKind::rmsprop : OptimizerKind::adam; }
  void validate() const;
};

/// Metric population statistics for one evaluation point.
struct TrainLogRow {
  std::size_t iteration = 0;
  SampleStats sf;
  SampleStats mm;
  SampleStats cov;
  double g_loss = 0.0;
  double d_loss = 0.0;
  double wall_seconds = 0.0;  ///< not written to the CSV
  std::size_t failed_samples = 0;
};

struct EvaluationResult {
  std::vector<MetricsReport> reports;
  std::size_t failed = 0;

  std::vector<double> values(Metric m) const;
  /// Fills the metric statistics of a log row.
  TrainLogRow row(std::size_t iteration) const;
};

struct EvalSamples {
  std::size_t iteration = 0;
  std::vector<MetricsReport> reports;
};

struct TrainResult {
  std::vector<TrainLogRow> log;
  std::vector<EvalSamples> samples;
  /// TimeGAN: reconstruction MSE on the un-augmented corpus before and after
  /// autoencoder pretraining, and per-iteration phase losses.
  std::optional<double> reconstruction_before;
  std::optional<double> reconstruction_after;
  std::vector<double> pretrain_losses;
  std::vector<double> supervised_losses;
};

struct TrainHooks {
  std::function<void(const TrainLogRow&)> on_eval;
};

/// Simulates and scores sequences, `workers` at a time. Sequences whose
/// simulation throws are counted in `failed` and skipped.
EvaluationResult evaluate_sequences(std::span<const ParametricSequence> sequences, std::size_t workers = 1);

/// Generates `count` samples with frozen weights and scores them.
EvaluationResult evaluate_model(const GanModel& model, std::size_t count, Rng& rng, std::size_t workers = 1);

TrainLogRow evaluate_checkpoint(const Checkpoint& ckpt, std::size_t count, Rng& rng, std::size_t workers = 1);

/// Trains a DCGAN or periodic spatial GAN in place.
TrainResult train_adversarial(GanModel& model, const CorpusManifest& corpus, const TrainConfig& config,
                              const TrainHooks& hooks = {});

/// Autoencoder pretraining, supervised-only phase, then joint training.
TrainResult train_timegan(Timegan& model, const CorpusManifest& corpus, const TrainConfig& config,
                          const TrainHooks& hooks = {});

TrainResult train(GanModel& model, const CorpusManifest& corpus, const TrainConfig& config,
                  const TrainHooks& hooks = {});

/// Mean squared reconstruction error of embed-then-reconstruct.
double reconstruction_mse(const Timegan& model, std::span<const ParametricSequence> sequences);

/// Columns: iter,sf_mean,sf_std,mm_mean,mm_std,cov_mean,cov_std,g_loss,d_loss
std::string train_log_csv(std::span<const TrainLogRow> rows);
std::vector<TrainLogRow> parse_train_log_csv(std::string_view text);

/// Columns: iter,index,sf,mm,cov
std::string eval_samples_csv(std::span<const EvalSamples> samples);
std::vector<EvalSamples> parse_eval_samples_csv(std::string_view text);

/// Real-corpus metric population.
struct Baseline {
  std::vector<MetricsReport> reports;

  std::vector<double> values(Metric m) const;
  double mean(Metric m) const;
};

Baseline baseline_from_corpus(const CorpusManifest& corpus, std::size_t workers = 1);
std::string baseline_to_json(const Baseline& baseline);
Baseline baseline_from_json(std::string_view text);

/// Writes curves.csv (iteration,metric,mean,std,js_vs_real) and one SVG per
/// metric. js_vs_real is filled where generated samples for that iteration
/// are available.
void emit_curves(std::span<const TrainLogRow> log, const Baseline& baseline, std::span<const EvalSamples> samples,
                 const std::filesystem::path& out_dir);

std::string curves_csv(std::span<const TrainLogRow> log, const Baseline& baseline,
                       std::span<const EvalSamples> samples);
std::string curve_svg(std::span<const TrainLogRow> log, Metric metric, double baseline_mean);

}  // namespace danmaku
