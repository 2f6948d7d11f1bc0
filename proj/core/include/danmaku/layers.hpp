#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "danmaku/autodiff.hpp"
#include "danmaku/rng.hpp"

namespace danmaku {

/// Puts parameters on a tape either as trainable leaves or as frozen reads.
class Binder {
 public:
  Binder(Tape& tape, bool train) : tape_(tape), train_(train) {}

  Tape& tape() const { return tape_; }
  bool training() const { return train_; }

  Var operator()(const Parameter& p) const {
    // Only training code paths, which own the model mutably, bind with train_ set.
    return train_ ? tape_.parameter(const_cast<Parameter&>(p)) : tape_.frozen(p);
  }

 private:
  Tape& tape_;
  bool train_;
};

/// Weights uniform in +-1/sqrt(in), bias likewise.
struct Linear {
  Parameter weight;  // [out, in]
  Parameter bias;    // [out]

  Linear() = default;
  Linear(const std::string& name, std::size_t in, std::size_t out, Rng& rng);
  Var forward(const Binder& bind, Var x) const;
  void collect(std::vector<Parameter*>& out);
};

/// Weights N(0, 0.02^2), zero bias.
struct Conv1d {
  Parameter weight;  // [out, in, kernel]
  Parameter bias;    // [out]
  std::size_t stride = 1;
  std::size_t padding = 0;

  Conv1d() = default;
  Conv1d(const std::string& name, std::size_t in, std::size_t out, std::size_t kernel, std::size_t stride,
         std::size_t padding, Rng& rng);
  Var forward(const Binder& bind, Var x) const;
  void collect(std::vector<Parameter*>& out);
};

/// Weights N(0, 0.02^2), zero bias.
struct ConvTranspose1d {
  Parameter weight;  // [in, out, kernel]
  Parameter bias;    // [out]
  std::size_t stride = 1;
  std::size_t padding = 0;

  ConvTranspose1d() = default;
  ConvTranspose1d(const std::string& name, std::size_t in, std::size_t out, std::size_t kernel, std::size_t stride,
                  std::size_t padding, Rng& rng);
  Var forward(const Binder& bind, Var x) const;
  void collect(std::vector<Parameter*>& out);
};

/// Stacked LSTM; each layer's weights uniform in +-1/sqrt(fan_in).
struct LstmStack {
  struct Layer {
    Parameter w_ih;  // [4H, D]
    Parameter w_hh;  // [4H, H]
    Parameter bias;  // [4H]
  };
  std::vector<Layer> layers;
  std::size_t hidden = 0;

  LstmStack() = default;
  LstmStack(const std::string& name, std::size_t in, std::size_t hidden, std::size_t num_layers, Rng& rng);
  /// x: [B, T, in] -> top-layer hidden states [B, T, hidden].
  Var forward(const Binder& bind, Var x) const;
  void collect(std::vector<Parameter*>& out);
};

/// in -> hidden (ReLU) -> out.
struct Mlp {
  Linear first;
  Linear second;

  Mlp() = default;
  Mlp(const std::string& name, std::size_t in, std::size_t hidden, std::size_t out, Rng& rng);
  Var forward(const Binder& bind, Var x) const;
  void collect(std::vector<Parameter*>& out);
};

std::size_t count_values(const std::vector<Parameter*>& params);

}  // namespace danmaku
