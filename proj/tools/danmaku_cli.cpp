// danmaku: command-line front end for the generation and evaluation toolkit.

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "danmaku/agent.hpp"
#include "danmaku/checkpoint.hpp"
#include "danmaku/codec.hpp"
#include "danmaku/corpus.hpp"
#include "danmaku/error.hpp"
#include "danmaku/metrics.hpp"
#include "danmaku/models.hpp"
#include "danmaku/program.hpp"
#include "danmaku/sim.hpp"
#include "danmaku/trainer.hpp"

#ifndef DANMAKU_VERSION
#define DANMAKU_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace danmaku;

namespace {

enum Exit { kOk = 0, kValidation = 1, kRuntime = 2 };

void report_error(std::string_view kind, std::string_view command, const std::string& message) {
  json rec{{"status", "error"}, {"kind", kind}, {"command", command}, {"message", message}};
  std::cerr << rec.dump() << '\n';
}

void require_file(const fs::path& p) {
  if (!fs::is_regular_file(p)) throw ValidationError("input file not found: " + p.string());
}

void require_dir(const fs::path& p) {
  if (!fs::is_directory(p)) throw ValidationError("input directory not found: " + p.string());
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write " + p.string());
  out << text;
  if (!out) throw IoError("write failed: " + p.string());
}

std::string utc_timestamp() {
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string join_path(const CLI::App* app) {
  std::string name = app->get_name();
  for (auto* p = app->get_parent(); p && p->get_parent(); p = p->get_parent()) name = p->get_name() + " " + name;
  return name;
}

// Sorted seq_*.json files of a directory.
std::vector<fs::path> sequence_files(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (entry.is_regular_file() && name.starts_with("seq_") && name.ends_with(".json")) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::vector<ParametricSequence> load_sequences(const fs::path& dir) {
  auto files = sequence_files(dir);
  if (files.empty()) throw ValidationError("no seq_*.json files in " + dir.string());
  std::vector<ParametricSequence> out;
  out.reserve(files.size());
  for (const auto& f : files) out.push_back(load_sequence(f));
  return out;
}

json events_to_json(const std::vector<ShotEvent>& events) {
  json arr = json::array();
  for (const auto& e : events) {
    arr.push_back({{"itv", e.itv},
                   {"spawn_dx", e.spawn_dx},
                   {"spawn_dy", e.spawn_dy},
                   {"angle", e.angle},
                   {"speed", e.speed},
                   {"accel", e.accel},
                   {"ang_vel", e.ang_vel},
                   {"radius", e.radius}});
  }
  return arr;
}

std::vector<ShotEvent> events_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("events file is not valid JSON: ") + e.what());
  }
  const json& arr = doc.is_object() && doc.contains("events") ? doc["events"] : doc;
  if (!arr.is_array()) throw ValidationError("events file must hold an array of shot events");
  std::vector<ShotEvent> events;
  try {
    for (const auto& o : arr) {
      ShotEvent e;
      e.itv = o.at("itv").get<int>();
      e.spawn_dx = o.value("spawn_dx", 0.0);
      e.spawn_dy = o.value("spawn_dy", 0.0);
      e.angle = o.value("angle", 0.0);
      e.speed = o.value("speed", 0.0);
      e.accel = o.value("accel", 0.0);
      e.ang_vel = o.value("ang_vel", 0.0);
      e.radius = o.value("radius", 2.0);
      events.push_back(e);
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed shot event: ") + e.what());
  }
  return events;
}

// Options of one subcommand, recorded into the run manifest.
struct Invocation {
  const CLI::App* app = nullptr;
  std::vector<std::string> argv;
  json seeds = json::object();
  json inputs = json::array();
  json outputs = json::array();

  json flags() const {
    json f = json::object();
    for (const auto* opt : app->get_options()) {
      if (opt->get_lnames().empty()) continue;
      const auto& name = opt->get_lnames().front();
      if (name == "help") continue;
      if (opt->get_expected_max() == 0) {
        f[name] = opt->count() > 0;
      } else if (opt->count() > 0) {
        f[name] = opt->results().size() == 1 ? json(opt->results().front()) : json(opt->results());
      } else {
        f[name] = opt->get_default_str();
      }
    }
    return f;
  }

  void write_manifest(const fs::path& dir) const {
    json m{{"subcommand", join_path(app)},
           {"flags", flags()},
           {"seeds", seeds},
           {"inputs", inputs},
           {"outputs", outputs},
           {"argv", argv},
           {"tool_version", DANMAKU_VERSION},
           {"timestamp", utc_timestamp()}};
    write_text(dir / "run_manifest.json", m.dump(2) + "\n");
  }
};

struct CorpusOpts {
  std::size_t count = 34;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  fs::path out;
};

int cmd_corpus_build(const CorpusOpts& o, Invocation& inv) {
  auto manifest = build_corpus(o.count, o.seed);
  auto baseline = baseline_from_corpus(manifest, o.workers);
  save_corpus(manifest, o.out);
  write_text(o.out / "baseline.json", baseline_to_json(baseline));
  inv.seeds["corpus"] = o.seed;
  inv.outputs = {o.out.string()};
  inv.write_manifest(o.out);
  std::cout << "wrote " << manifest.count() << " programs to " << o.out.string() << '\n';
  return kOk;
}

struct EncodeOpts {
  fs::path events;
  std::string template_name;
  std::vector<double> params;
  std::uint64_t seed = 0;
  fs::path out;
};

int cmd_encode(const EncodeOpts& o, Invocation& inv) {
  ParametricSequence seq;
  if (!o.events.empty()) {
    require_file(o.events);
    inv.inputs = {o.events.string()};
    auto events = events_from_json(read_text(o.events));
    seq = ParametricSequence::encode(events);
  } else {
    if (o.template_name.empty()) throw ValidationError("encode needs --events or --template");
    DanmakuProgram program{parse_template(o.template_name), o.params, o.seed};
    validate(program);
    seq = unroll(program);
  }
  save_sequence(seq, o.out);
  return kOk;
}

int cmd_decode(const fs::path& in, const fs::path& out) {
  require_file(in);
  auto seq = load_sequence(in);
  write_text(out, events_to_json(seq.decode()).dump(2) + "\n");
  return kOk;
}

int cmd_simulate(const fs::path& in, const fs::path& report, bool momentum) {
  require_file(in);
  auto seq = load_sequence(in);
  auto trace = run(seq);
  auto metrics = evaluate(trace);
  json doc = json::parse(to_json(metrics));
  doc["trace"] = json::parse(trace_summary_json(trace, momentum));
  write_text(report, doc.dump(2) + "\n");
  return kOk;
}

int cmd_render(const fs::path& in, int stride, const fs::path& out, Invocation& inv) {
  require_file(in);
  auto seq = load_sequence(in);
  SimConfig config;
  config.record_snapshots = true;
  auto trace = run(seq, config);
  auto files = render_frames(trace, stride, out, config);
  inv.inputs = {in.string()};
  inv.outputs = {out.string()};
  inv.write_manifest(out);
  std::cout << "wrote " << files.size() << " frames to " << out.string() << '\n';
  return kOk;
}

struct TrainOpts {
  std::string model;
  fs::path data;
  std::size_t iters = 5000;
  std::uint64_t seed = 0;
  fs::path out;
  std::size_t batch = 12;
  double lr = 0.0;
  std::size_t pretrain = 5000;
  std::size_t supervised = 500;
  bool skip_pretrain = false;
  std::size_t eval_every = 20;
  std::size_t eval_samples = 30;
  std::size_t workers = 1;
};

int cmd_train(const TrainOpts& o, Invocation& inv) {
  require_dir(o.data);
  require_file(o.data / "manifest.json");
  const auto kind = parse_model(o.model);
  auto config = TrainConfig::defaults(kind);
  config.iterations = o.iters;
  config.seed = o.seed;
  config.batch_size = o.batch;
  if (o.lr > 0.0) config.learning_rate = o.lr;
  config.pretrain_iterations = o.pretrain;
  config.supervised_iterations = o.supervised;
  config.skip_pretraining = o.skip_pretrain;
  config.eval_every = o.eval_every;
  config.eval_samples = o.eval_samples;
  config.workers = o.workers;
  config.diagnostics_path = o.out / "diagnostics.bin";
  config.validate();

  auto corpus = load_corpus(o.data);
  auto model = make_model(kind, o.seed);

  TrainHooks hooks;
  hooks.on_eval = [](const TrainLogRow& r) {
    std::cout << "iter " << r.iteration << " sf " << r.sf.mean << " mm " << r.mm.mean << " cov " << r.cov.mean
              << " g_loss " << r.g_loss << " d_loss " << r.d_loss << " (" << r.wall_seconds << " s)\n";
  };
  auto result = train(*model, corpus, config, hooks);

  fs::create_directories(o.out);
  model->checkpoint(o.seed, o.iters).save(o.out / "checkpoint.bin");
  write_text(o.out / "train_log.csv", train_log_csv(result.log));
  write_text(o.out / "eval_samples.csv", eval_samples_csv(result.samples));
  if (result.reconstruction_before && result.reconstruction_after) {
    std::cout << "reconstruction mse " << *result.reconstruction_before << " -> " << *result.reconstruction_after
              << '\n';
  }
  inv.seeds["train"] = o.seed;
  inv.seeds["corpus"] = corpus.seed;
  inv.inputs = {o.data.string()};
  inv.outputs = {o.out.string()};
  inv.write_manifest(o.out);
  return kOk;
}

int cmd_generate(const fs::path& ckpt_path, std::size_t count, std::uint64_t seed, const fs::path& out,
                 Invocation& inv) {
  require_file(ckpt_path);
  auto ckpt = Checkpoint::load(ckpt_path);
  auto model = model_from_checkpoint(ckpt);
  Rng rng(seed);
  auto seqs = model->generate(count, rng);
  fs::create_directories(out);
  for (std::size_t i = 0; i < seqs.size(); ++i) save_sequence(seqs[i], out / sequence_file_name(i));
  inv.seeds["generate"] = seed;
  inv.inputs = {ckpt_path.string()};
  inv.outputs = {out.string()};
  inv.write_manifest(out);
  return kOk;
}

int cmd_evaluate(const fs::path& real, const fs::path& gen, const fs::path& out, std::size_t workers) {
  require_dir(real);
  require_dir(gen);
  auto a = evaluate_sequences(load_sequences(real), workers);
  auto b = evaluate_sequences(load_sequences(gen), workers);
  if (a.reports.empty() || b.reports.empty()) throw NumericError("every sequence of one side failed to simulate");
  std::string csv = "metric,js_value,n_a,n_b\n";
  for (auto m : kAllMetrics) {
    csv += std::string(metric_name(m)) + "," + format_double(js_divergence(a.values(m), b.values(m))) + "," +
           std::to_string(a.reports.size()) + "," + std::to_string(b.reports.size()) + "\n";
  }
  write_text(out, csv);
  return kOk;
}

int cmd_curves(const fs::path& log, const fs::path& baseline, const fs::path& samples, const fs::path& out,
               Invocation& inv) {
  require_file(log);
  require_file(baseline);
  if (!samples.empty()) require_file(samples);
  auto rows = parse_train_log_csv(read_text(log));
  if (rows.empty()) throw ValidationError("train log has no rows: " + log.string());
  auto base = baseline_from_json(read_text(baseline));
  std::vector<EvalSamples> evals;
  if (!samples.empty()) evals = parse_eval_samples_csv(read_text(samples));
  emit_curves(rows, base, evals, out);
  inv.inputs = {log.string(), baseline.string()};
  if (!samples.empty()) inv.inputs.push_back(samples.string());
  inv.outputs = {out.string()};
  inv.write_manifest(out);
  return kOk;
}

int cmd_agent(const fs::path& in, const fs::path& report, const AgentConfig& config) {
  require_file(in);
  config.validate();
  auto seq = load_sequence(in);
  auto r = playability(seq, config);
  write_text(report, report_to_json(r));
  std::cout << "survived " << r.survived_frames << "/" << r.t_total << " frames\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Danmaku generation and evaluation toolkit", "danmaku"};
  app.require_subcommand(1);
  app.set_version_flag("--version", DANMAKU_VERSION);

  Invocation inv;
  inv.argv.assign(argv, argv + argc);
  std::function<int()> action;

  auto* corpus = app.add_subcommand("corpus", "Synthetic corpus tools");
  corpus->require_subcommand(1);
  CorpusOpts corpus_o;
  auto* build = corpus->add_subcommand("build", "Build a corpus directory");
  build->add_option("--count", corpus_o.count, "Number of programs")->check(CLI::PositiveNumber)->capture_default_str();
  build->add_option("--seed", corpus_o.seed, "Corpus seed")->capture_default_str();
  build->add_option("--workers", corpus_o.workers, "Parallel simulations")->check(CLI::PositiveNumber)->capture_default_str();
  build->add_option("--out", corpus_o.out, "Output directory")->required();
  build->callback([&] { action = [&] { return cmd_corpus_build(corpus_o, inv); }; inv.app = build; });

  EncodeOpts enc;
  auto* encode = app.add_subcommand("encode", "Encode shot events or a template program as a sequence");
  auto* ev_opt = encode->add_option("--events", enc.events, "JSON array of shot events");
  auto* tpl_opt = encode->add_option("--template", enc.template_name, "Template name");
  ev_opt->excludes(tpl_opt);
  encode->add_option("--params", enc.params, "Template parameters")->delimiter(',')->needs(tpl_opt);
  encode->add_option("--seed", enc.seed, "Program seed")->capture_default_str();
  encode->add_option("--out", enc.out, "Output sequence JSON")->required();
  encode->callback([&] { action = [&] { return cmd_encode(enc, inv); }; inv.app = encode; });

  fs::path dec_in, dec_out;
  auto* decode = app.add_subcommand("decode", "Decode a sequence into physical shot events");
  decode->add_option("--in", dec_in, "Sequence JSON")->required();
  decode->add_option("--out", dec_out, "Output events JSON")->required();
  decode->callback([&] { action = [&] { return cmd_decode(dec_in, dec_out); }; inv.app = decode; });

  fs::path sim_in, sim_report;
  bool sim_momentum = false;
  auto* simulate = app.add_subcommand("simulate", "Simulate a sequence and score it");
  simulate->add_option("--in", sim_in, "Sequence JSON")->required();
  simulate->add_option("--report", sim_report, "Output report JSON")->required();
  simulate->add_flag("--momentum", sim_momentum, "Include per-frame momentum sums");
  simulate->callback([&] { action = [&] { return cmd_simulate(sim_in, sim_report, sim_momentum); }; inv.app = simulate; });

  fs::path render_in, render_out;
  int render_stride = 10;
  auto* render = app.add_subcommand("render", "Render simulated frames as PPM images");
  render->add_option("--in", render_in, "Sequence JSON")->required();
  render->add_option("--stride", render_stride, "Frame stride")->check(CLI::PositiveNumber)->capture_default_str();
  render->add_option("--out", render_out, "Output directory")->required();
  render->callback([&] { action = [&] { return cmd_render(render_in, render_stride, render_out, inv); }; inv.app = render; });

  TrainOpts tr;
  auto* trainc = app.add_subcommand("train", "Train a generator on a corpus");
  trainc->add_option("--model", tr.model, "dcgan, psgan or timegan")
      ->required()
      ->check(CLI::IsMember({"dcgan", "psgan", "timegan"}));
  trainc->add_option("--data", tr.data, "Corpus directory")->required();
  trainc->add_option("--iters", tr.iters, "Adversarial iterations")->check(CLI::PositiveNumber)->capture_default_str();
  trainc->add_option("--seed", tr.seed, "Training seed")->capture_default_str();
  trainc->add_option("--out", tr.out, "Output directory")->required();
  trainc->add_option("--batch", tr.batch, "Batch size")->check(CLI::PositiveNumber)->capture_default_str();
  trainc->add_option("--lr", tr.lr, "Learning rate (default depends on model)")->check(CLI::PositiveNumber);
  trainc->add_option("--pretrain-iters", tr.pretrain, "TimeGAN autoencoder iterations")->capture_default_str();
  trainc->add_option("--supervised-iters", tr.supervised, "TimeGAN supervised iterations")->capture_default_str();
  trainc->add_flag("--skip-pretrain", tr.skip_pretrain, "TimeGAN: skip the first two phases");
  trainc->add_option("--eval-every", tr.eval_every, "Evaluation period")->check(CLI::PositiveNumber)->capture_default_str();
  trainc->add_option("--eval-samples", tr.eval_samples, "Samples per evaluation")->check(CLI::PositiveNumber)->capture_default_str();
  trainc->add_option("--workers", tr.workers, "Parallel simulations")->check(CLI::PositiveNumber)->capture_default_str();
  trainc->callback([&] { action = [&] { return cmd_train(tr, inv); }; inv.app = trainc; });

  fs::path gen_ckpt, gen_out;
  std::size_t gen_count = 30;
  std::uint64_t gen_seed = 0;
  auto* generate = app.add_subcommand("generate", "Sample sequences from a checkpoint");
  generate->add_option("--ckpt", gen_ckpt, "Checkpoint file")->required();
  generate->add_option("--count", gen_count, "Number of sequences")->check(CLI::PositiveNumber)->capture_default_str();
  generate->add_option("--seed", gen_seed, "Sampling seed")->capture_default_str();
  generate->add_option("--out", gen_out, "Output directory")->required();
  generate->callback([&] {
    action = [&] { return cmd_generate(gen_ckpt, gen_count, gen_seed, gen_out, inv); };
    inv.app = generate;
  });

  fs::path eval_real, eval_gen, eval_out;
  std::size_t eval_workers = 1;
  auto* evaluatec = app.add_subcommand("evaluate", "JS divergence of metric distributions between two sequence sets");
  evaluatec->add_option("--real", eval_real, "Directory of real seq_*.json")->required();
  evaluatec->add_option("--gen", eval_gen, "Directory of generated seq_*.json")->required();
  evaluatec->add_option("--out", eval_out, "Output CSV")->required();
  evaluatec->add_option("--workers", eval_workers, "Parallel simulations")->check(CLI::PositiveNumber)->capture_default_str();
  evaluatec->callback([&] {
    action = [&] { return cmd_evaluate(eval_real, eval_gen, eval_out, eval_workers); };
    inv.app = evaluatec;
  });

  fs::path curves_log, curves_base, curves_samples, curves_out;
  auto* curves = app.add_subcommand("curves", "Plot training curves against the real baseline");
  curves->add_option("--log", curves_log, "train_log.csv")->required();
  curves->add_option("--baseline", curves_base, "baseline.json of the corpus")->required();
  curves->add_option("--samples", curves_samples, "eval_samples.csv for the js_vs_real column");
  curves->add_option("--out", curves_out, "Output directory")->required();
  curves->callback([&] {
    action = [&] { return cmd_curves(curves_log, curves_base, curves_samples, curves_out, inv); };
    inv.app = curves;
  });

  fs::path agent_in, agent_report;
  AgentConfig agent_cfg;
  auto* agent = app.add_subcommand("agent", "Run the dodging agent against a sequence");
  agent->add_option("--in", agent_in, "Sequence JSON")->required();
  agent->add_option("--report", agent_report, "Output report JSON")->required();
  agent->add_option("--horizon", agent_cfg.horizon, "Search depth in frames")->capture_default_str();
  agent->add_option("--speed", agent_cfg.speed, "Move speed in px/frame")->capture_default_str();
  agent->add_option("--hit-radius", agent_cfg.hit_radius, "Player hit radius in px")->capture_default_str();
  agent->callback([&] { action = [&] { return cmd_agent(agent_in, agent_report, agent_cfg); }; inv.app = agent; });

  auto deepest = [&app] {
    const CLI::App* a = &app;
    while (!a->get_subcommands().empty()) a = a->get_subcommands().front();
    return a;
  };
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << deepest()->help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    std::cout << DANMAKU_VERSION << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    // Usage goes to stdout so stderr stays a single machine-readable line.
    const CLI::App* failing = deepest();
    std::cout << failing->help();
    report_error("usage", failing == &app ? "" : join_path(failing), e.what());
    return kValidation;
  }

  const std::string command = inv.app ? join_path(inv.app) : "";
  try {
    return action();
  } catch (const ValidationError& e) {
    report_error("validation", command, e.what());
    return kValidation;
  } catch (const std::exception& e) {
    report_error("runtime", command, e.what());
    return kRuntime;
  }
}
