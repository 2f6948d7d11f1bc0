#include "danmaku/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "danmaku/error.hpp"

namespace danmaku {

CorpusManifest build_corpus(std::size_t count, std::uint64_t seed) {
  if (count == 0) throw ValidationError("corpus: count must be at least 1");
  CorpusManifest m;
  m.seed = seed;
  const Rng root(seed);
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng = root.fork(i);
    const auto& info = all_templates()[i % kTemplateCount];
    DanmakuProgram prog;
    prog.template_id = info.id;
    for (const auto& spec : info.params) {
      double v = rng.uniform(spec.lo, spec.hi);
      if (spec.integral) v = std::clamp(std::round(v), spec.lo, spec.hi);
      prog.params.push_back(v);
    }
    prog.seed = rng.next_u64();
    m.programs.push_back(std::move(prog));
  }
  return m;
}

std::vector<double> augment(std::span<const double> params, double scale, Rng& rng) {
  if (!(scale >= 0.0)) throw ValidationError("augment: scale must be non-negative");
  std::vector<double> out(params.begin(), params.end());
  for (double& v : out) {
    const double sigma = scale * std::abs(v);
    const double eps = rng.normal();
    v += sigma * eps;
  }
  return out;
}

DanmakuProgram augment(const DanmakuProgram& program, double scale, Rng& rng) {
  const auto& info = template_info(program.template_id);
  DanmakuProgram out = program;
  out.params = augment(program.params, scale, rng);
  for (std::size_t i = 0; i < info.arity() && i < out.params.size(); ++i) {
    out.params[i] = std::clamp(out.params[i], info.params[i].lo, info.params[i].hi);
  }
  return out;
}

std::vector<ParametricSequence> load_batch(const CorpusManifest& manifest, std::size_t batch_size, Rng& rng,
                                           double scale) {
  if (manifest.programs.empty()) throw ValidationError("load_batch: empty corpus");
  std::vector<ParametricSequence> batch;
  batch.reserve(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) {
    const auto& prog = manifest.programs[rng.below(manifest.programs.size())];
    batch.push_back(unroll(augment(prog, scale, rng)));
  }
  return batch;
}

Tensor stack_sequences(std::span<const ParametricSequence> sequences) {
  if (sequences.empty()) throw ValidationError("stack_sequences: no sequences");
  Tensor t({sequences.size(), kSequenceLength, kFeatureDims});
  for (std::size_t b = 0; b < sequences.size(); ++b)
    for (std::size_t i = 0; i < kSequenceLength; ++i)
      for (std::size_t j = 0; j < kFeatureDims; ++j) t.at(b, i, j) = sequences[b].row(i)[j];
  return t;
}

std::string sequence_file_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "seq_%03zu.json", index);
  return buf;
}

std::string manifest_to_json(const CorpusManifest& manifest) {
  std::string out = "{\"version\":1,\"seed\":" + std::to_string(manifest.seed) +
                    ",\"count\":" + std::to_string(manifest.count()) + ",\"programs\":[";
  for (std::size_t i = 0; i < manifest.programs.size(); ++i) {
    const auto& p = manifest.programs[i];
    out += i ? ",\n" : "\n";
    out += "{\"template\":\"" + std::string(template_name(p.template_id)) + "\",\"params\":[";
    for (std::size_t j = 0; j < p.params.size(); ++j) {
      if (j) out += ",";
      out += format_double(p.params[j]);
    }
    out += "],\"seed\":" + std::to_string(p.seed) + ",\"file\":\"" + sequence_file_name(i) + "\"}";
  }
  out += "\n]}\n";
  return out;
}

CorpusManifest manifest_from_json(std::string_view text) {
  try {
    const auto doc = nlohmann::json::parse(text);
    if (doc.at("version").get<int>() != 1) throw ValidationError("manifest: unsupported version");
    CorpusManifest m;
    m.seed = doc.at("seed").get<std::uint64_t>();
    for (const auto& entry : doc.at("programs")) {
      DanmakuProgram p;
      p.template_id = parse_template(entry.at("template").get<std::string>());
      p.params = entry.at("params").get<std::vector<double>>();
      p.seed = entry.at("seed").get<std::uint64_t>();
      validate(p);
      m.programs.push_back(std::move(p));
    }
    if (doc.at("count").get<std::size_t>() != m.programs.size()) {
      throw ValidationError("manifest: count does not match the number of programs");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("manifest: ") + e.what());
  }
}

void save_corpus(const CorpusManifest& manifest, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "manifest.json", std::ios::binary);
    if (!f) throw IoError("cannot write " + (dir / "manifest.json").string());
    f << manifest_to_json(manifest);
  }
  for (std::size_t i = 0; i < manifest.programs.size(); ++i) {
    save_sequence(unroll(manifest.programs[i]), dir / sequence_file_name(i));
  }
}

CorpusManifest load_corpus(const std::filesystem::path& dir) {
  const auto path = std::filesystem::is_directory(dir) ? dir / "manifest.json" : dir;
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot open corpus manifest " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return manifest_from_json(ss.str());
}

}  // namespace danmaku
