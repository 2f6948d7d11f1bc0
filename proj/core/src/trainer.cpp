#include "danmaku/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <thread>

#include "danmaku/error.hpp"
#include "danmaku/ops.hpp"

namespace danmaku {
namespace {

constexpr std::uint64_t kDataStream = 0xda7a;
constexpr std::uint64_t kNoiseStream = 0x4e015e;
constexpr std::uint64_t kEvalStream = 0xe7a1;

Tensor filled(const Shape& shape, double v) { return Tensor(shape, v); }

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

[[noreturn]] void abort_training(GanModel& model, const TrainConfig& config, std::size_t iteration,
                                 const std::string& phase, const NumericError& err) {
  if (!config.diagnostics_path.empty()) {
    try {
      model.checkpoint(config.seed, iteration).save(config.diagnostics_path);
    } catch (const Error&) {
    }
  }
  throw NumericError("training diverged in phase '" + phase + "' at iteration " + std::to_string(iteration) + ": " +
                     err.what());
}

std::vector<ParametricSequence> unaugmented(const CorpusManifest& corpus) {
  std::vector<ParametricSequence> out;
  for (const auto& p : corpus.programs) out.push_back(unroll(p));
  return out;
}

void run_eval(const GanModel& model, const TrainConfig& config, std::size_t iteration, double g_loss, double d_loss,
              std::chrono::steady_clock::time_point start, TrainResult& result, const TrainHooks& hooks) {
  Rng rng = Rng(config.seed).fork(kEvalStream + iteration);
  const auto eval = evaluate_model(model, config.eval_samples, rng, config.workers);
  TrainLogRow row = eval.row(iteration);
  row.g_loss = g_loss;
  row.d_loss = d_loss;
  row.wall_seconds = seconds_since(start);
  result.log.push_back(row);
  result.samples.push_back({iteration, eval.reports});
  if (hooks.on_eval) hooks.on_eval(row);
}

/// Shared DCGAN / PSGAN loop; `Model` supplies the parameter groups and the
/// discriminator.
template <class Model>
TrainResult adversarial_loop(Model& model, const CorpusManifest& corpus, const TrainConfig& config,
                             const TrainHooks& hooks) {
  AdamConfig adam;
  adam.learning_rate = config.learning_rate;
  Adam g_opt(model.generator_parameters(), adam);
  Adam d_opt(model.discriminator_parameters(), adam);
  Rng data_rng = Rng(config.seed).fork(kDataStream);
  Rng noise_rng = Rng(config.seed).fork(kNoiseStream);
  const auto start = std::chrono::steady_clock::now();
  TrainResult result;
  Tape tape;
  for (std::size_t it = 1; it <= config.iterations; ++it) {
    double d_loss = 0.0, g_loss = 0.0;
    try {
      // Discriminator: real batch vs. frozen-generator fakes.
      tape.clear();
      d_opt.zero_grad();
      const auto real_seqs = load_batch(corpus, config.batch_size, data_rng, config.augment_scale);
      const Var real = tape.constant(stack_sequences(real_seqs));
      const Var fake = model.generate_batch(Binder(tape, false), config.batch_size, noise_rng);
      const Binder d_train(tape, true);
      const Var real_logits = model.discriminator_logits(d_train, real);
      const Var fake_logits = model.discriminator_logits(d_train, fake);
      const Var d = ops::add(ops::bce_with_logits(real_logits, filled(real_logits.shape(), 1.0)),
                             ops::bce_with_logits(fake_logits, filled(fake_logits.shape(), 0.0)));
      d_loss = d.value()[0];
      tape.backward(d);
      d_opt.step();

      // Generator: fresh fakes labelled real against a frozen discriminator.
      tape.clear();
      g_opt.zero_grad();
      const Var gen = model.generate_batch(Binder(tape, true), config.batch_size, noise_rng);
      const Var logits = model.discriminator_logits(Binder(tape, false), gen);
      const Var g = ops::bce_with_logits(logits, filled(logits.shape(), 1.0));
      g_loss = g.value()[0];
      tape.backward(g);
      g_opt.step();
    } catch (const NumericError& e) {
      abort_training(model, config, it, "adversarial", e);
    }
    if (config.eval_every > 0 && it % config.eval_every == 0) {
      run_eval(model, config, it, g_loss, d_loss, start, result, hooks);
    }
  }
  return result;
}

Var one_step_ahead_loss(Var supervised, Var latent) {
  const std::size_t T = latent.shape()[1];
  return ops::mse(ops::time_slice(supervised, 0, T - 1), ops::time_slice(latent, 1, T));
}

}  // namespace

TrainConfig TrainConfig::defaults(ModelKind model) {
  TrainConfig c;
  c.model = model;
  c.learning_rate = model == ModelKind::timegan ? 2e-3 : 2e-4;
  return c;
}

void TrainConfig::validate() const {
  if (batch_size == 0) throw ValidationError("train: batch size must be positive");
  if (!(learning_rate > 0.0)) throw ValidationError("train: learning rate must be positive");
  if (eval_samples == 0) throw ValidationError("train: eval samples must be positive");
  if (workers == 0) throw ValidationError("train: workers must be positive");
  if (augment_scale < 0.0) throw ValidationError("train: augmentation scale must be non-negative");
}

std::vector<double> EvaluationResult::values(Metric m) const {
  std::vector<double> out;
  for (const auto& r : reports) out.push_back(metric_value(r, m));
  return out;
}

TrainLogRow EvaluationResult::row(std::size_t iteration) const {
  TrainLogRow r;
  r.iteration = iteration;
  r.sf = sample_stats(values(Metric::sf));
  r.mm = sample_stats(values(Metric::mm));
  r.cov = sample_stats(values(Metric::cov));
  r.failed_samples = failed;
  return r;
}

EvaluationResult evaluate_sequences(std::span<const ParametricSequence> sequences, std::size_t workers) {
  std::vector<std::optional<MetricsReport>> slots(sequences.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < sequences.size(); i = next++) {
      try {
        slots[i] = evaluate(sequences[i]);
      } catch (const Error&) {
        slots[i].reset();
      }
    }
  };
  const std::size_t n = std::max<std::size_t>(1, std::min(workers, sequences.size()));
  if (n == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < n; ++i) pool.emplace_back(work);
  }
  EvaluationResult out;
  for (const auto& s : slots) {
    if (s) {
      out.reports.push_back(*s);
    } else {
      ++out.failed;
    }
  }
  return out;
}

EvaluationResult evaluate_model(const GanModel& model, std::size_t count, Rng& rng, std::size_t workers) {
  const auto seqs = model.generate(count, rng);
  return evaluate_sequences(seqs, workers);
}

TrainLogRow evaluate_checkpoint(const Checkpoint& ckpt, std::size_t count, Rng& rng, std::size_t workers) {
  const auto model = model_from_checkpoint(ckpt);
  return evaluate_model(*model, count, rng, workers).row(ckpt.iteration);
}

TrainResult train_adversarial(GanModel& model, const CorpusManifest& corpus, const TrainConfig& config,
                              const TrainHooks& hooks) {
  config.validate();
  if (auto* m = dynamic_cast<Dcgan*>(&model)) return adversarial_loop(*m, corpus, config, hooks);
  if (auto* m = dynamic_cast<Psgan*>(&model)) return adversarial_loop(*m, corpus, config, hooks);
  throw ValidationError("train_adversarial: expects a dcgan or psgan model");
}

double reconstruction_mse(const Timegan& model, std::span<const ParametricSequence> sequences) {
  Tape tape;
  const Binder bind(tape, false);
  const Var x = tape.constant(stack_sequences(sequences));
  return ops::mse(model.reconstruct(bind, model.embed(bind, x)), x).value()[0];
}

TrainResult train_timegan(Timegan& model, const CorpusManifest& corpus, const TrainConfig& config,
                          const TrainHooks& hooks) {
  config.validate();
  RmspropConfig rms;
  rms.learning_rate = config.learning_rate;
  Rmsprop e_opt(model.autoencoder_parameters(), rms);
  Rmsprop g_opt(model.generator_parameters(), rms);
  Rmsprop d_opt(model.discriminator_parameters(), rms);
  Rng data_rng = Rng(config.seed).fork(kDataStream);
  Rng noise_rng = Rng(config.seed).fork(kNoiseStream);
  const auto start = std::chrono::steady_clock::now();
  const auto reference = unaugmented(corpus);
  const std::size_t B = config.batch_size;
  TrainResult result;
  Tape tape;
  const Binder train(tape, true);
  const Binder frozen(tape, false);

  auto real_batch = [&] { return tape.constant(stack_sequences(load_batch(corpus, B, data_rng, config.augment_scale))); };
  auto noise_batch = [&](const Binder& bind) {
    return model.noise.forward(bind, model.noise.sample_global(B, noise_rng), model.config().noise_length);
  };

  if (!config.skip_pretraining) {
    try {
      result.reconstruction_before = reconstruction_mse(model, reference);
    } catch (const NumericError& e) {
      abort_training(model, config, 0, "autoencoder", e);
    }
    for (std::size_t it = 1; it <= config.pretrain_iterations; ++it) {
      try {
        tape.clear();
        e_opt.zero_grad();
        const Var x = real_batch();
        const Var loss = ops::mse(model.reconstruct(train, model.embed(train, x)), x);
        result.pretrain_losses.push_back(loss.value()[0]);
        tape.backward(loss);
        e_opt.step();
      } catch (const NumericError& e) {
        abort_training(model, config, it, "autoencoder", e);
      }
    }
    result.reconstruction_after = reconstruction_mse(model, reference);

    for (std::size_t it = 1; it <= config.supervised_iterations; ++it) {
      try {
        tape.clear();
        g_opt.zero_grad();
        const Var h = model.embed(frozen, real_batch());
        const Var loss = one_step_ahead_loss(model.supervise(train, h), h);
        result.supervised_losses.push_back(loss.value()[0]);
        tape.backward(loss);
        g_opt.step();
      } catch (const NumericError& e) {
        abort_training(model, config, it, "supervised", e);
      }
    }
  }

  for (std::size_t it = 1; it <= config.iterations; ++it) {
    double g_loss = 0.0, d_loss = 0.0;
    try {
      // Generator and supervisor: adversarial + eta * supervised.
      tape.clear();
      g_opt.zero_grad();
      {
        const Var h = model.embed(frozen, real_batch());
        const Var sup = one_step_ahead_loss(model.supervise(train, h), h);
        const Var h_hat = model.supervise(train, model.generate_latent(train, noise_batch(train)));
        const Var logits = model.discriminator_logits(frozen, h_hat);
        const Var adv = ops::bce_with_logits(logits, filled(logits.shape(), 1.0));
        const Var loss = ops::add(adv, ops::scale(sup, config.eta));
        g_loss = loss.value()[0];
        tape.backward(loss);
        g_opt.step();
      }

      // Embedder and reconstructor: reconstruction + lambda * supervised.
      tape.clear();
      e_opt.zero_grad();
      {
        const Var x = real_batch();
        const Var h = model.embed(train, x);
        const Var rec = ops::mse(model.reconstruct(train, h), x);
        const Var sup = one_step_ahead_loss(model.supervise(frozen, h), h);
        const Var loss = ops::add(rec, ops::scale(sup, config.lambda));
        tape.backward(loss);
        e_opt.step();
      }

      // Discriminator on real vs. generated latent sequences.
      tape.clear();
      d_opt.zero_grad();
      {
        const Var h = model.embed(frozen, real_batch());
        const Var h_hat = model.supervise(frozen, model.generate_latent(frozen, noise_batch(frozen)));
        const Var real_logits = model.discriminator_logits(train, h);
        const Var fake_logits = model.discriminator_logits(train, h_hat);
        const Var loss = ops::add(ops::bce_with_logits(real_logits, filled(real_logits.shape(), 1.0)),
                                  ops::bce_with_logits(fake_logits, filled(fake_logits.shape(), 0.0)));
        d_loss = loss.value()[0];
        tape.backward(loss);
        d_opt.step();
      }
    } catch (const NumericError& e) {
      abort_training(model, config, it, "joint", e);
    }
    if (config.eval_every > 0 && it % config.eval_every == 0) {
      run_eval(model, config, it, g_loss, d_loss, start, result, hooks);
    }
  }
  return result;
}

TrainResult train(GanModel& model, const CorpusManifest& corpus, const TrainConfig& config, const TrainHooks& hooks) {
  if (model.kind() != config.model) throw ValidationError("train: config model does not match the model instance");
  if (auto* t = dynamic_cast<Timegan*>(&model)) return train_timegan(*t, corpus, config, hooks);
  return train_adversarial(model, corpus, config, hooks);
}

// ---------------------------------------------------------------- CSV

std::string train_log_csv(std::span<const TrainLogRow> rows) {
  std::string out = "iter,sf_mean,sf_std,mm_mean,mm_std,cov_mean,cov_std,g_loss,d_loss\n";
  for (const auto& r : rows) {
    out += std::to_string(r.iteration);
    for (double v : {r.sf.mean, r.sf.stddev, r.mm.mean, r.mm.stddev, r.cov.mean, r.cov.stddev, r.g_loss, r.d_loss}) {
      out += "," + format_double(v);
    }
    out += "\n";
  }
  return out;
}

namespace {

std::vector<std::vector<std::string>> csv_rows(std::string_view text, std::size_t columns, const char* what) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != columns) {
      throw ValidationError(std::string(what) + ": expected " + std::to_string(columns) + " columns in '" + line + "'");
    }
    rows.push_back(std::move(cells));
  }
  return rows;
}

double to_double(const std::string& s, const char* what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ValidationError(std::string(what) + ": bad number '" + s + "'");
  }
}

}  // namespace

std::vector<TrainLogRow> parse_train_log_csv(std::string_view text) {
  std::vector<TrainLogRow> out;
  for (const auto& c : csv_rows(text, 9, "train log")) {
    TrainLogRow r;
    r.iteration = static_cast<std::size_t>(to_double(c[0], "train log"));
    r.sf = {to_double(c[1], "train log"), to_double(c[2], "train log")};
    r.mm = {to_double(c[3], "train log"), to_double(c[4], "train log")};
    r.cov = {to_double(c[5], "train log"), to_double(c[6], "train log")};
    r.g_loss = to_double(c[7], "train log");
    r.d_loss = to_double(c[8], "train log");
    out.push_back(r);
  }
  return out;
}

std::string eval_samples_csv(std::span<const EvalSamples> samples) {
  std::string out = "iter,index,sf,mm,cov\n";
  for (const auto& s : samples) {
    for (std::size_t i = 0; i < s.reports.size(); ++i) {
      const auto& r = s.reports[i];
      out += std::to_string(s.iteration) + "," + std::to_string(i) + "," + format_double(r.sf) + "," +
             format_double(r.mm) + "," + format_double(r.cov) + "\n";
    }
  }
  return out;
}

std::vector<EvalSamples> parse_eval_samples_csv(std::string_view text) {
  std::vector<EvalSamples> out;
  for (const auto& c : csv_rows(text, 5, "eval samples")) {
    const auto iter = static_cast<std::size_t>(to_double(c[0], "eval samples"));
    if (out.empty() || out.back().iteration != iter) out.push_back({iter, {}});
    out.back().reports.push_back(
        {to_double(c[2], "eval samples"), to_double(c[3], "eval samples"), to_double(c[4], "eval samples")});
  }
  return out;
}

// ---------------------------------------------------------------- baseline

std::vector<double> Baseline::values(Metric m) const {
  std::vector<double> out;
  for (const auto& r : reports) out.push_back(metric_value(r, m));
  return out;
}

double Baseline::mean(Metric m) const { return sample_stats(values(m)).mean; }

Baseline baseline_from_corpus(const CorpusManifest& corpus, std::size_t workers) {
  const auto seqs = unaugmented(corpus);
  auto eval = evaluate_sequences(seqs, workers);
  if (eval.failed) throw Error("baseline: " + std::to_string(eval.failed) + " corpus sequences failed to simulate");
  return Baseline{std::move(eval.reports)};
}

std::string baseline_to_json(const Baseline& baseline) {
  std::string out = "{";
  bool first = true;
  for (Metric m : kAllMetrics) {
    const auto vals = baseline.values(m);
    out += first ? "" : ",";
    first = false;
    out += "\"" + std::string(metric_name(m)) + "\":{\"mean\":" + format_double(sample_stats(vals).mean) +
           ",\"std\":" + format_double(sample_stats(vals).stddev) + ",\"values\":[";
    for (std::size_t i = 0; i < vals.size(); ++i) out += (i ? "," : "") + format_double(vals[i]);
    out += "]}";
  }
  return out + "}\n";
}

Baseline baseline_from_json(std::string_view text) {
  try {
    const auto doc = nlohmann::json::parse(text);
    const auto sf = doc.at("sf").at("values").get<std::vector<double>>();
    const auto mm = doc.at("mm").at("values").get<std::vector<double>>();
    const auto cov = doc.at("cov").at("values").get<std::vector<double>>();
    if (sf.size() != mm.size() || sf.size() != cov.size() || sf.empty()) {
      throw ValidationError("baseline: metric value lists must be non-empty and equally long");
    }
    Baseline b;
    for (std::size_t i = 0; i < sf.size(); ++i) b.reports.push_back({sf[i], mm[i], cov[i]});
    return b;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("baseline: ") + e.what());
  }
}

// ---------------------------------------------------------------- curves

namespace {

const SampleStats& stats_of(const TrainLogRow& r, Metric m) {
  switch (m) {
    case Metric::sf: return r.sf;
    case Metric::mm: return r.mm;
    case Metric::cov: return r.cov;
  }
  return r.sf;
}

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

std::string curves_csv(std::span<const TrainLogRow> log, const Baseline& baseline,
                       std::span<const EvalSamples> samples) {
  std::string out = "iteration,metric,mean,std,js_vs_real\n";
  for (const auto& row : log) {
    const EvalSamples* match = nullptr;
    for (const auto& s : samples) {
      if (s.iteration == row.iteration) match = &s;
    }
    for (Metric m : kAllMetrics) {
      const auto& st = stats_of(row, m);
      out += std::to_string(row.iteration) + "," + std::string(metric_name(m)) + "," + format_double(st.mean) + "," +
             format_double(st.stddev) + ",";
      if (match && !match->reports.empty() && !baseline.reports.empty()) {
        std::vector<double> gen;
        for (const auto& r : match->reports) gen.push_back(metric_value(r, m));
        out += format_double(js_divergence(gen, baseline.values(m)));
      }
      out += "\n";
    }
  }
  return out;
}

std::string curve_svg(std::span<const TrainLogRow> log, Metric metric, double baseline_mean) {
  constexpr double kW = 640, kH = 360, kLeft = 60, kRight = 20, kTop = 30, kBottom = 40;
  double x_lo = 0, x_hi = 1, y_lo = baseline_mean, y_hi = baseline_mean;
  bool any_spread = false;
  if (!log.empty()) {
    x_lo = static_cast<double>(log.front().iteration);
    x_hi = static_cast<double>(log.back().iteration);
  }
  for (const auto& r : log) {
    const auto& st = stats_of(r, metric);
    y_lo = std::min(y_lo, st.mean - st.stddev);
    y_hi = std::max(y_hi, st.mean + st.stddev);
    any_spread = any_spread || st.stddev > 0.0;
  }
  if (x_hi <= x_lo) x_hi = x_lo + 1;
  if (y_hi <= y_lo) {
    y_lo -= 0.5;
    y_hi += 0.5;
  }
  const double pad = 0.05 * (y_hi - y_lo);
  y_lo -= pad;
  y_hi += pad;
  auto px = [&](double x) { return kLeft + (x - x_lo) / (x_hi - x_lo) * (kW - kLeft - kRight); };
  auto py = [&](double y) { return kH - kBottom - (y - y_lo) / (y_hi - y_lo) * (kH - kTop - kBottom); };

  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"360\" viewBox=\"0 0 640 360\">\n";
  s += "<rect width=\"640\" height=\"360\" fill=\"white\"/>\n";
  s += "<text x=\"320\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" +
       std::string(metric_name(metric)) + "</text>\n";
  s += "<line x1=\"" + fixed(kLeft) + "\" y1=\"" + fixed(kH - kBottom) + "\" x2=\"" + fixed(kW - kRight) + "\" y2=\"" +
       fixed(kH - kBottom) + "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + fixed(kLeft) + "\" y1=\"" + fixed(kTop) + "\" x2=\"" + fixed(kLeft) + "\" y2=\"" +
       fixed(kH - kBottom) + "\" stroke=\"black\"/>\n";
  s += "<text x=\"" + fixed(kLeft - 4) + "\" y=\"" + fixed(py(y_hi)) +
       "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" + format_double(y_hi).substr(0, 8) +
       "</text>\n";
  s += "<text x=\"" + fixed(kLeft - 4) + "\" y=\"" + fixed(py(y_lo)) +
       "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" + format_double(y_lo).substr(0, 8) +
       "</text>\n";
  s += "<text x=\"" + fixed(kW - kRight) + "\" y=\"" + fixed(kH - kBottom + 16) +
       "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" +
       std::to_string(static_cast<long long>(x_hi)) + "</text>\n";
  if (any_spread) {
    std::string pts;
    for (const auto& r : log) {
      const auto& st = stats_of(r, metric);
      pts += fixed(px(static_cast<double>(r.iteration))) + "," + fixed(py(st.mean + st.stddev)) + " ";
    }
    for (auto it = log.rbegin(); it != log.rend(); ++it) {
      const auto& st = stats_of(*it, metric);
      pts += fixed(px(static_cast<double>(it->iteration))) + "," + fixed(py(st.mean - st.stddev)) + " ";
    }
    pts.pop_back();
    s += "<polygon class=\"band\" points=\"" + pts + "\" fill=\"#4060c0\" fill-opacity=\"0.25\" stroke=\"none\"/>\n";
  }
  s += "<line class=\"baseline\" x1=\"" + fixed(kLeft) + "\" y1=\"" + fixed(py(baseline_mean)) + "\" x2=\"" +
       fixed(kW - kRight) + "\" y2=\"" + fixed(py(baseline_mean)) +
       "\" stroke=\"#c04040\" stroke-dasharray=\"6,4\"/>\n";
  if (!log.empty()) {
    std::string pts;
    for (const auto& r : log) {
      pts += fixed(px(static_cast<double>(r.iteration))) + "," + fixed(py(stats_of(r, metric).mean)) + " ";
    }
    pts.pop_back();
    s += "<polyline class=\"mean\" points=\"" + pts + "\" fill=\"none\" stroke=\"#2040a0\" stroke-width=\"2\"/>\n";
  }
  return s + "</svg>\n";
}

void emit_curves(std::span<const TrainLogRow> log, const Baseline& baseline, std::span<const EvalSamples> samples,
                 const std::filesystem::path& out_dir) {
  if (log.empty()) throw ValidationError("curves: train log is empty");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("curves: cannot create " + out_dir.string() + ": " + ec.message());
  auto write = [](const std::filesystem::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw IoError("curves: cannot write " + p.string());
    f << text;
  };
  write(out_dir / "curves.csv", curves_csv(log, baseline, samples));
  for (Metric m : kAllMetrics) {
    write(out_dir / (std::string(metric_name(m)) + ".svg"), curve_svg(log, m, baseline.mean(m)));
  }
}

}  // namespace danmaku
