#include "danmaku/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "danmaku/error.hpp"

namespace danmaku {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint writer assumes a little-endian host");

constexpr char kMagic[8] = {'D', 'M', 'K', 'C', 'K', 'P', 'T', '\0'};

template <class T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <class T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::string str(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  void doubles(double* dst, std::size_t n) {
    need(n * sizeof(double));
    std::memcpy(dst, bytes_.data() + pos_, n * sizeof(double));
    pos_ += n * sizeof(double);
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw ValidationError("checkpoint: truncated data");
  }
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

Checkpoint Checkpoint::capture(std::string architecture, std::uint64_t seed, std::uint64_t iteration,
                               std::span<Parameter* const> params) {
  Checkpoint c;
  c.architecture = std::move(architecture);
  c.seed = seed;
  c.iteration = iteration;
  for (const Parameter* p : params) c.tensors.push_back({p->name, p->value});
  return c;
}

void Checkpoint::restore(std::span<Parameter* const> params) const {
  std::map<std::string, const Tensor*> by_name;
  for (const auto& t : tensors) by_name[t.name] = &t.value;
  for (Parameter* p : params) {
    auto it = by_name.find(p->name);
    if (it == by_name.end()) throw ValidationError("checkpoint: missing tensor '" + p->name + "'");
    if (it->second->shape() != p->value.shape()) {
      throw ValidationError("checkpoint: tensor '" + p->name + "' has shape " + shape_string(it->second->shape()) +
                            ", model expects " + shape_string(p->value.shape()));
    }
    p->value = *it->second;
    p->zero_grad();
  }
}

std::string Checkpoint::serialize() const {
  nlohmann::ordered_json header;
  header["architecture"] = architecture;
  header["seed"] = seed;
  header["iteration"] = iteration;
  header["meta"] = meta;
  const std::string header_text = header.dump();

  std::string out(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kVersion);
  put<std::uint64_t>(out, header_text.size());
  out += header_text;
  put<std::uint64_t>(out, tensors.size());
  for (const auto& t : tensors) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.name.size()));
    out += t.name;
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.value.rank()));
    for (std::size_t d : t.value.shape()) put<std::uint64_t>(out, d);
    out.append(reinterpret_cast<const char*>(t.value.data()), t.value.size() * sizeof(double));
  }
  return out;
}

Checkpoint Checkpoint::deserialize(const std::string& bytes) {
  Reader r(bytes);
  if (r.str(sizeof(kMagic)) != std::string(kMagic, sizeof(kMagic))) {
    throw ValidationError("checkpoint: bad magic, not a checkpoint file");
  }
  const auto version = r.get<std::uint32_t>();
  if (version != kVersion) throw ValidationError("checkpoint: unsupported version " + std::to_string(version));
  const auto header_len = r.get<std::uint64_t>();
  Checkpoint c;
  try {
    const auto header = nlohmann::json::parse(r.str(header_len));
    c.architecture = header.at("architecture").get<std::string>();
    c.seed = header.at("seed").get<std::uint64_t>();
    c.iteration = header.at("iteration").get<std::uint64_t>();
    c.meta = header.at("meta").get<std::map<std::string, std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("checkpoint: bad header: ") + e.what());
  }
  const auto count = r.get<std::uint64_t>();
  for (std::uint64_t i = 0; i < count; ++i) {
    NamedTensor t;
    t.name = r.str(r.get<std::uint32_t>());
    const auto rank = r.get<std::uint32_t>();
    Shape shape(rank);
    for (auto& d : shape) d = r.get<std::uint64_t>();
    t.value = Tensor(shape);
    r.doubles(t.value.data(), t.value.size());
    c.tensors.push_back(std::move(t));
  }
  if (!r.done()) throw ValidationError("checkpoint: trailing bytes");
  return c;
}

void Checkpoint::save(const std::filesystem::path& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("checkpoint: cannot open " + path.string() + " for writing");
  const std::string bytes = serialize();
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("checkpoint: write failed for " + path.string());
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError("checkpoint: cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return deserialize(ss.str());
}

}  // namespace danmaku
