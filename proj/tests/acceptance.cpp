// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
//
//   acceptance <path-to-danmaku-cli> [work-dir]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "danmaku/codec.hpp"
#include "danmaku/corpus.hpp"
#include "danmaku/metrics.hpp"
#include "danmaku/models.hpp"
#include "danmaku/ops.hpp"
#include "danmaku/sim.hpp"
#include "danmaku/trainer.hpp"
#include "gradient_cases.hpp"
#include "naive_oracle.hpp"

using namespace danmaku;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_seconds;
  std::function<Outcome()> body;
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream ss;
  ss.precision(digits);
  ss << v;
  return ss.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------- 1

std::size_t transposed_len(std::size_t l, const ConvTranspose1d& c) {
  return (l - 1) * c.stride - 2 * c.padding + c.weight.value.shape()[2];
}

std::size_t conv_len(std::size_t l, const Conv1d& c) {
  return (l + 2 * c.padding - c.weight.value.shape()[2]) / c.stride + 1;
}

// Walks the layers one by one, recording the spatial length after each, and
// checks it against both the expected chain and the textbook formula.
template <class Model>
bool audit(const Model& m, Var x, const std::vector<std::size_t>& gen_expected, Var seq,
           const std::vector<std::size_t>& disc_expected, std::string& detail) {
  Binder bind(x.tape(), false);
  std::vector<std::size_t> g{x.shape()[2]}, g_formula{x.shape()[2]};
  for (const auto& layer : m.generator) {
    g_formula.push_back(transposed_len(g_formula.back(), layer));
    x = layer.forward(bind, x);
    g.push_back(x.shape()[2]);
  }
  Var h = ops::swap_last_axes(seq);
  std::vector<std::size_t> d{h.shape()[2]}, d_formula{h.shape()[2]};
  for (const auto& layer : m.discriminator) {
    d_formula.push_back(conv_len(d_formula.back(), layer));
    h = layer.forward(bind, h);
    d.push_back(h.shape()[2]);
  }
  auto show = [](const std::vector<std::size_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "->" : "") + std::to_string(v[i]);
    return s;
  };
  detail += "gen " + show(g) + ", disc " + show(d) + "; ";
  return g == gen_expected && g == g_formula && d == disc_expected && d == d_formula;
}

Outcome shape_audit() {
  Outcome o;
  Tape tape;
  Rng rng(1);
  Dcgan dc(1);
  Psgan ps(1);
  const Var z = tape.constant(testing::random_tensor({2, Dcgan::kLatent, 1}, rng));
  const Var seq = tape.constant(Tensor({2, kSequenceLength, kFeatureDims}, 0.5));
  const bool a = audit(dc, z, {1, 4, 8, 16, 32, 64}, seq, {64, 32, 16, 8, 4, 1}, o.detail);
  const Var noise = ops::swap_last_axes(ps.noise.forward(Binder(tape, false), ps.noise.sample_global(2, rng), 10));
  const bool b = audit(ps, noise, {10, 13, 28, 31, 64}, seq, {64, 31, 28, 13, 10}, o.detail);
  const bool c = Dcgan::generator_length_chain() == std::vector<std::size_t>{1, 4, 8, 16, 32, 64} &&
                 Psgan::generator_length_chain() == std::vector<std::size_t>{10, 13, 28, 31, 64};
  o.pass = a && b && c;
  return o;
}

// ---------------------------------------------------------------- 2

Outcome gradient_suite() {
  Outcome o{true, ""};
  double worst_all = 0.0;
  for (const auto& c : testing::layer_gradient_cases()) {
    const double worst = c.run(20, 0xacce97);
    worst_all = std::max(worst_all, worst);
    if (!(worst <= 1e-6)) {
      o.pass = false;
      o.detail += c.name + " err " + fmt(worst) + "; ";
    }
  }
  o.detail += "worst relative error " + fmt(worst_all, 3) + " over 20 instances per layer";
  return o;
}

// ---------------------------------------------------------------- 3

Outcome metric_oracles() {
  Outcome o{true, ""};
  Rng rng(0x0acc);
  SimConfig cfg;
  cfg.max_frames = 50;
  int mismatches = 0;
  for (int n = 0; n < 50; ++n) {
    const auto events = testing::small_scenario(rng);
    const auto fast = evaluate(run(events, cfg));
    const auto slow = testing::naive_metrics(events, cfg);
    if (fast.sf != slow.sf || fast.mm != slow.mm || fast.cov != slow.cov) ++mismatches;
  }
  std::vector<double> a, b;
  for (int i = 0; i < 30; ++i) {
    a.push_back(rng.uniform(0, 1));
    b.push_back(rng.uniform(5, 6));
  }
  const double same = js_divergence(a, a);
  const double disjoint = js_divergence(a, b);
  const bool js_ok = same == 0.0 && disjoint >= std::numbers::ln2 - 1e-3 && disjoint <= std::numbers::ln2;
  o.pass = mismatches == 0 && js_ok;
  o.detail = "50 traces, " + std::to_string(mismatches) + " mismatches; JS(a,a)=" + fmt(same) +
             ", JS(disjoint)=" + fmt(disjoint, 8);
  return o;
}

// ---------------------------------------------------------------- 4

Outcome codec_round_trip() {
  Rng rng(0xc0dec);
  const double tol = 1e-12;
  int bad_events = 0, bad_json = 0;
  for (int n = 0; n < 1000; ++n) {
    std::vector<ShotEvent> events(kSequenceLength);
    for (auto& e : events) {
      e.itv = static_cast<int>(rng.below(kMaxInterval + 1));
      e.spawn_dx = rng.uniform(-64, 64);
      e.spawn_dy = rng.uniform(-64, 64);
      e.angle = rng.uniform(0, 2 * std::numbers::pi);
      e.speed = rng.uniform(0, 6);
      e.accel = rng.uniform(-0.1, 0.1);
      e.ang_vel = rng.uniform(-0.2, 0.2);
      e.radius = rng.uniform(2, 16);
    }
    const auto seq = ParametricSequence::encode(events);
    const auto back = seq.decode();
    for (std::size_t i = 0; i < kSequenceLength; ++i) {
      const auto& x = events[i];
      const auto& y = back[i];
      const double fields[][3] = {{x.spawn_dx, y.spawn_dx, 128},  {x.spawn_dy, y.spawn_dy, 128},
                                  {x.angle, y.angle, 2 * std::numbers::pi}, {x.speed, y.speed, 6},
                                  {x.accel, y.accel, 0.2},        {x.ang_vel, y.ang_vel, 0.4},
                                  {x.radius, y.radius, 14}};
      bool ok = x.itv == y.itv;
      for (const auto& f : fields) ok = ok && std::abs(f[0] - f[1]) <= tol * f[2];
      if (!ok) ++bad_events;
    }
    // Generator-style rows with fractional itv: denormalize rounds only itv.
    std::vector<FeatureRow> rows(kSequenceLength);
    for (auto& r : rows)
      for (auto& v : r) v = rng.uniform();
    const auto raw = ParametricSequence::from_rows(rows);
    const auto text = to_json(raw);
    const auto reloaded = sequence_from_json(text);
    if (!(reloaded == raw) || to_json(reloaded) != text) ++bad_json;
    const auto decoded = raw.decode();
    for (std::size_t i = 0; i < kSequenceLength; ++i) {
      if (decoded[i].itv != static_cast<int>(std::floor(rows[i][0] * kMaxInterval + 0.5))) ++bad_events;
    }
  }
  return {bad_events == 0 && bad_json == 0, "1000 sequences, " + std::to_string(bad_events) + " field mismatches, " +
                                                std::to_string(bad_json) + " JSON reload mismatches"};
}

// ---------------------------------------------------------------- 5

struct Cli {
  fs::path exe;
  fs::path work;

  int operator()(const std::string& args) const {
    const std::string cmd = "\"" + exe.string() + "\" " + args + " > \"" + (work / "cli.log").string() + "\" 2>&1";
    return std::system(cmd.c_str());
  }
};

// Byte comparison of every file in two directories except run_manifest.json.
bool same_tree(const fs::path& a, const fs::path& b, std::string& why) {
  auto files = [](const fs::path& root) {
    std::vector<fs::path> out;
    for (const auto& e : fs::recursive_directory_iterator(root))
      if (e.is_regular_file() && e.path().filename() != "run_manifest.json") out.push_back(fs::relative(e.path(), root));
    std::sort(out.begin(), out.end());
    return out;
  };
  const auto fa = files(a), fb = files(b);
  if (fa != fb || fa.empty()) {
    why = "file lists differ under " + a.filename().string();
    return false;
  }
  for (const auto& f : fa) {
    if (slurp(a / f) != slurp(b / f)) {
      why = "bytes differ: " + (a.filename() / f).string();
      return false;
    }
  }
  return true;
}

Outcome determinism(const Cli& cli) {
  const fs::path w = cli.work / "determinism";
  fs::remove_all(w);
  fs::create_directories(w);
  auto p = [&](const std::string& name) { return "\"" + (w / name).string() + "\""; };
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const char* run : {"a", "b"}) {
    const std::string r = run;
    if (cli("corpus build --count 34 --seed 7 --out " + p("corpus_" + r)) != 0)
      return {false, "corpus build failed"};
  }
  pairs.push_back({"corpus_a", "corpus_b"});
  for (const char* model : {"dcgan", "psgan", "timegan"}) {
    const std::string m = model;
    const std::string extra = m == "timegan" ? " --pretrain-iters 100 --supervised-iters 100" : "";
    for (const char* run : {"a", "b"}) {
      const std::string r = run;
      if (cli("train --model " + m + " --data " + p("corpus_a") + " --iters 100 --seed 11" + extra + " --out " +
              p("train_" + m + "_" + r)) != 0)
        return {false, "train " + m + " failed"};
      if (cli("generate --ckpt " + p("train_" + m + "_" + r + "/checkpoint.bin") + " --count 30 --seed 5 --out " +
              p("gen_" + m + "_" + r)) != 0)
        return {false, "generate " + m + " failed"};
    }
    pairs.push_back({"train_" + m + "_a", "train_" + m + "_b"});
    pairs.push_back({"gen_" + m + "_a", "gen_" + m + "_b"});
  }
  for (const auto& [a, b] : pairs) {
    std::string why;
    if (!same_tree(w / a, w / b, why)) return {false, why};
  }
  return {true, std::to_string(pairs.size()) + " output directories byte-identical across reruns"};
}

// ---------------------------------------------------------------- 6 / 8

struct SmokeResults {
  std::vector<std::pair<ModelKind, std::vector<TrainLogRow>>> logs;
  bool ran = false;
};

bool finite_log(const std::vector<TrainLogRow>& log) {
  return std::all_of(log.begin(), log.end(),
                     [](const TrainLogRow& r) { return std::isfinite(r.g_loss) && std::isfinite(r.d_loss); });
}

Outcome training_smoke(SmokeResults& out) {
  const auto corpus = build_corpus(34, 7);
  Outcome o{true, ""};
  for (auto kind : {ModelKind::dcgan, ModelKind::psgan}) {
    auto cfg = TrainConfig::defaults(kind);
    cfg.iterations = 500;
    cfg.seed = 21;
    auto model = make_model(kind, cfg.seed);
    try {
      const auto r = train(*model, corpus, cfg);
      const bool ok = finite_log(r.log) && r.log.size() == 25;
      o.pass = o.pass && ok;
      o.detail += std::string(model_name(kind)) + (ok ? " finite" : " non-finite") + " (last g " +
                  fmt(r.log.back().g_loss) + ", d " + fmt(r.log.back().d_loss) + "); ";
      out.logs.push_back({kind, r.log});
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail += std::string(model_name(kind)) + " aborted: " + e.what() + "; ";
    }
  }
  auto cfg = TrainConfig::defaults(ModelKind::timegan);
  cfg.pretrain_iterations = 500;
  cfg.supervised_iterations = 100;
  cfg.iterations = 500;
  cfg.seed = 21;
  Timegan tg(cfg.seed);
  try {
    const auto r = train(tg, corpus, cfg);
    const bool finite = finite_log(r.log) &&
                        std::all_of(r.pretrain_losses.begin(), r.pretrain_losses.end(),
                                    [](double v) { return std::isfinite(v); }) &&
                        std::all_of(r.supervised_losses.begin(), r.supervised_losses.end(),
                                    [](double v) { return std::isfinite(v); });
    const bool improved = *r.reconstruction_after < *r.reconstruction_before;
    o.pass = o.pass && finite && improved;
    o.detail += "timegan reconstruction MSE " + fmt(*r.reconstruction_before) + " -> " +
                fmt(*r.reconstruction_after) + (finite ? "" : " non-finite") + " (below 0.01: " +
                (*r.reconstruction_after < 0.01 ? "yes" : "no") + ")";
    out.logs.push_back({ModelKind::timegan, r.log});
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail += std::string("timegan aborted: ") + e.what();
  }
  out.ran = true;
  return o;
}

Outcome mode_collapse_report(const SmokeResults& smoke) {
  if (smoke.logs.size() != 3) return {false, "training smoke run did not produce three logs"};
  Outcome o{true, ""};
  std::string highest;
  double highest_sum = -1.0;
  for (const auto& [kind, log] : smoke.logs) {
    double s = 0.0, m = 0.0, c = 0.0;
    for (const auto& r : log) {
      s += r.sf.stddev;
      m += r.mm.stddev;
      c += r.cov.stddev;
      if (!(r.sf.stddev >= 0 && r.mm.stddev >= 0 && r.cov.stddev >= 0)) o.pass = false;
    }
    const double n = static_cast<double>(log.size());
    o.detail += std::string(model_name(kind)) + " mean std sf " + fmt(s / n) + " mm " + fmt(m / n) + " cov " +
                fmt(c / n) + "; ";
    // Each metric scaled by its own magnitude so the sum is comparable.
    const double score = s / n + m / n / 100.0 + c / n;
    if (score > highest_sum) {
      highest_sum = score;
      highest = std::string(model_name(kind));
    }
  }
  o.detail += "largest spread: " + highest + " (reported, not gated)";
  return o;
}

// ---------------------------------------------------------------- 7

Outcome learning_signal() {
  const auto corpus = build_corpus(34, 7);
  std::vector<ParametricSequence> real;
  for (std::size_t i = 0; i < 30; ++i) real.push_back(unroll(corpus.programs[i]));
  const auto real_sf = evaluate_sequences(real).values(Metric::sf);
  int improved = 0;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Psgan model(seed);
    Rng eval0(0x7e57 + seed);
    const double before = js_divergence(real_sf, evaluate_model(model, 30, eval0).values(Metric::sf));
    auto cfg = TrainConfig::defaults(ModelKind::psgan);
    cfg.iterations = 2000;
    cfg.eval_every = 2000;
    cfg.seed = seed;
    train(model, corpus, cfg);
    Rng eval1(0x7e57 + seed);
    const double after = js_divergence(real_sf, evaluate_model(model, 30, eval1).values(Metric::sf));
    if (after < before) ++improved;
    detail += "seed " + std::to_string(seed) + ": " + fmt(before) + " -> " + fmt(after) + "; ";
  }
  return {improved >= 3, detail + std::to_string(improved) + "/5 improved (need 3)"};
}

// ---------------------------------------------------------------- 9

Outcome noise_contract() {
  Rng init(0x9015e);
  PeriodicNoise noise("noise", NoiseSpec{}, init);
  const auto& spec = noise.spec();
  // Plain-loop two-layer perceptron with ReLU between the layers.
  auto mlp = [](const Mlp& net, const std::vector<double>& x) {
    auto affine = [](const Linear& l, const std::vector<double>& in, bool relu) {
      const auto& w = l.weight.value;
      const std::size_t rows = w.shape()[0], cols = w.shape()[1];
      std::vector<double> out(rows);
      for (std::size_t r = 0; r < rows; ++r) {
        double acc = l.bias.value[r];
        for (std::size_t c = 0; c < cols; ++c) acc += w[r * cols + c] * in[c];
        out[r] = relu ? std::max(0.0, acc) : acc;
      }
      return out;
    };
    return affine(net.second, affine(net.first, x, true), false);
  };
  Rng rng(0xd4a3);
  double worst = 0.0;
  int global_mismatch = 0;
  for (int n = 0; n < 1000; ++n) {
    const std::size_t length = 10;
    const Tensor z = make_noise(noise, length, rng);
    std::vector<double> g(spec.global_dim);
    for (std::size_t j = 0; j < spec.global_dim; ++j) g[j] = z.at(0, j);
    for (std::size_t i = 1; i < length; ++i)
      for (std::size_t j = 0; j < spec.global_dim; ++j)
        if (z.at(i, j) != g[j]) ++global_mismatch;
    const auto k1 = mlp(noise.k1, g), k2 = mlp(noise.k2, g);
    for (std::size_t i = 0; i < length; ++i)
      for (std::size_t j = 0; j < spec.periodic_dim; ++j) {
        // Row positions count from 1.
        const double expect = std::sin(static_cast<double>(i + 1) * k1[j] + k2[j]);
        worst = std::max(worst, std::abs(z.at(i, spec.global_dim + j) - expect));
      }
  }
  return {global_mismatch == 0 && worst <= 1e-12,
          "1000 draws, global mismatches " + std::to_string(global_mismatch) + ", periodic max |err| " + fmt(worst, 3)};
}

// ---------------------------------------------------------------- 10

Outcome performance() {
  // Worst case for the engine: 64 large stationary bullets, the last one
  // fired near the frame cap, so every bullet lives until T_max.
  std::vector<ShotEvent> events(kSequenceLength);
  for (std::size_t i = 0; i < events.size(); ++i) {
    auto& e = events[i];
    e.itv = i == 0 ? 0 : 56;
    e.spawn_dx = -64.0 + 2.0 * static_cast<double>(i);
    e.spawn_dy = 64.0 - 2.0 * static_cast<double>(i);
    e.angle = 0.09 * static_cast<double>(i);
    e.speed = 0.05;
    e.accel = 0.0;
    e.ang_vel = 0.2;
    e.radius = 16.0;
  }
  const auto seq = ParametricSequence::encode(events);
  auto t0 = Clock::now();
  const auto trace = run(seq);
  const auto report = evaluate(trace);
  const double single = std::chrono::duration<double>(Clock::now() - t0).count();

  double worst_eval = 0.0;
  std::string detail;
  for (auto kind : {ModelKind::dcgan, ModelKind::psgan, ModelKind::timegan}) {
    auto model = make_model(kind, 3);
    Rng rng(4);
    t0 = Clock::now();
    const auto r = evaluate_model(*model, 30, rng, 4);
    const double dt = std::chrono::duration<double>(Clock::now() - t0).count();
    worst_eval = std::max(worst_eval, dt);
    detail += std::string(model_name(kind)) + " " + fmt(dt, 3) + " s; ";
    if (r.reports.size() + r.failed != 30) return {false, "evaluation lost samples"};
  }
  const bool ok = single < 1.0 && worst_eval < 10.0 && trace.t_total <= 3600 && std::isfinite(report.mm);
  return {ok, "single run T_total " + std::to_string(trace.t_total) + " in " + fmt(single, 3) +
                  " s (< 1 s); 30 samples, 4 workers: " + detail + "(< 10 s)"};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <danmaku-cli> [work-dir]\n";
    return 2;
  }
  Cli cli{fs::absolute(argv[1]), argc > 2 ? fs::absolute(argv[2]) : fs::temp_directory_path() / "danmaku_acceptance"};
  fs::create_directories(cli.work);

  SmokeResults smoke;
  const std::vector<Criterion> criteria{
      {1, "shape audit", 1.0, shape_audit},
      {2, "gradient suite", 30.0, gradient_suite},
      {3, "metric oracles", 10.0, metric_oracles},
      {4, "codec round trip", 5.0, codec_round_trip},
      {5, "determinism", 600.0, [&] { return determinism(cli); }},
      {6, "training smoke", 1800.0, [&] { return training_smoke(smoke); }},
      {7, "learning signal", 3600.0, learning_signal},
      {8, "mode-collapse diagnostic", 1.0, [&] { return mode_collapse_report(smoke); }},
      {9, "noise contract", 5.0, noise_contract},
      {10, "performance budget", 60.0, performance},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double dt = std::chrono::duration<double>(Clock::now() - t0).count();
    const bool in_budget = dt < c.budget_seconds;
    const bool pass = o.pass && in_budget;
    if (!pass) ++failed;
    std::printf("[%s] %2d %-26s %8.2f s (budget %.0f s)  %s%s\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(), dt,
                c.budget_seconds, o.detail.c_str(), in_budget ? "" : " [over budget]");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
