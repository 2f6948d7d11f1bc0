#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "danmaku/program.hpp"
#include "danmaku/rng.hpp"

namespace danmaku {

inline constexpr double kDefaultAugmentScale = 0.05;

struct CorpusManifest {
  std::uint64_t seed = 0;
  std::vector<DanmakuProgram> programs;

  std::size_t count() const { return programs.size(); }
  bool operator==(const CorpusManifest&) const = default;
};

/// Deterministic synthetic corpus. Program i uses template family i mod 6
/// and draws its parameters uniformly inside the template bounds from a
/// per-program substream of `seed`.
CorpusManifest build_corpus(std::size_t count, std::uint64_t seed);

/// Gaussian mutation p_j + N(0, (scale * |p_j|)^2), no clamping.
std::vector<double> augment(std::span<const double> params, double scale, Rng& rng);

/// Mutation followed by clamping to the template's bounds.
DanmakuProgram augment(const DanmakuProgram& program, double scale, Rng& rng);

/// Samples `batch_size` programs uniformly with replacement, augments each
/// and unrolls it.
std::vector<ParametricSequence> load_batch(const CorpusManifest& manifest, std::size_t batch_size, Rng& rng,
                                           double scale = kDefaultAugmentScale);

/// Packs sequences into a [batch, 64, 8] tensor.
Tensor stack_sequences(std::span<const ParametricSequence> sequences);

/// manifest.json plus seq_NNN.json (un-augmented unroll) per program.
void save_corpus(const CorpusManifest& manifest, const std::filesystem::path& dir);
CorpusManifest load_corpus(const std::filesystem::path& dir);

std::string manifest_to_json(const CorpusManifest& manifest);
CorpusManifest manifest_from_json(std::string_view text);

std::string sequence_file_name(std::size_t index);

}  // namespace danmaku
