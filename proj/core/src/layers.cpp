#include "danmaku/layers.hpp"

#include <cmath>

#include "danmaku/ops.hpp"

namespace danmaku {
namespace {

Parameter uniform_param(std::string name, Shape shape, double bound, Rng& rng) {
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = rng.uniform(-bound, bound);
  return Parameter(std::move(name), std::move(t));
}

Parameter normal_param(std::string name, Shape shape, double stddev, Rng& rng) {
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = stddev * rng.normal();
  return Parameter(std::move(name), std::move(t));
}

constexpr double kConvInitStd = 0.02;

}  // namespace

Linear::Linear(const std::string& name, std::size_t in, std::size_t out, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  weight = uniform_param(name + ".weight", {out, in}, bound, rng);
  bias = uniform_param(name + ".bias", {out}, bound, rng);
}

Var Linear::forward(const Binder& bind, Var x) const { return ops::linear(x, bind(weight), bind(bias)); }

void Linear::collect(std::vector<Parameter*>& out) {
  out.push_back(&weight);
  out.push_back(&bias);
}

Conv1d::Conv1d(const std::string& name, std::size_t in, std::size_t out, std::size_t kernel, std::size_t stride_,
               std::size_t padding_, Rng& rng)
    : stride(stride_), padding(padding_) {
  weight = normal_param(name + ".weight", {out, in, kernel}, kConvInitStd, rng);
  bias = Parameter(name + ".bias", Tensor({out}));
}

Var Conv1d::forward(const Binder& bind, Var x) const {
  return ops::conv1d(x, bind(weight), bind(bias), stride, padding);
}

void Conv1d::collect(std::vector<Parameter*>& out) {
  out.push_back(&weight);
  out.push_back(&bias);
}

ConvTranspose1d::ConvTranspose1d(const std::string& name, std::size_t in, std::size_t out, std::size_t kernel,
                                 std::size_t stride_, std::size_t padding_, Rng& rng)
    : stride(stride_), padding(padding_) {
  weight = normal_param(name + ".weight", {in, out, kernel}, kConvInitStd, rng);
  bias = Parameter(name + ".bias", Tensor({out}));
}

Var ConvTranspose1d::forward(const Binder& bind, Var x) const {
  return ops::conv1d_transpose(x, bind(weight), bind(bias), stride, padding);
}

void ConvTranspose1d::collect(std::vector<Parameter*>& out) {
  out.push_back(&weight);
  out.push_back(&bias);
}

LstmStack::LstmStack(const std::string& name, std::size_t in, std::size_t hidden_, std::size_t num_layers, Rng& rng)
    : hidden(hidden_) {
  for (std::size_t l = 0; l < num_layers; ++l) {
    const std::size_t d = l == 0 ? in : hidden;
    const std::string prefix = name + ".lstm" + std::to_string(l);
    Layer layer;
    layer.w_ih = uniform_param(prefix + ".w_ih", {4 * hidden, d}, 1.0 / std::sqrt(static_cast<double>(d)), rng);
    layer.w_hh =
        uniform_param(prefix + ".w_hh", {4 * hidden, hidden}, 1.0 / std::sqrt(static_cast<double>(hidden)), rng);
    layer.bias = uniform_param(prefix + ".bias", {4 * hidden}, 1.0 / std::sqrt(static_cast<double>(hidden)), rng);
    layers.push_back(std::move(layer));
  }
}

Var LstmStack::forward(const Binder& bind, Var x) const {
  Var h = x;
  for (const auto& layer : layers) h = ops::lstm_layer(h, bind(layer.w_ih), bind(layer.w_hh), bind(layer.bias));
  return h;
}

void LstmStack::collect(std::vector<Parameter*>& out) {
  for (auto& layer : layers) {
    out.push_back(&layer.w_ih);
    out.push_back(&layer.w_hh);
    out.push_back(&layer.bias);
  }
}

Mlp::Mlp(const std::string& name, std::size_t in, std::size_t hidden, std::size_t out, Rng& rng)
    : first(name + ".fc0", in, hidden, rng), second(name + ".fc1", hidden, out, rng) {}

Var Mlp::forward(const Binder& bind, Var x) const { return second.forward(bind, ops::relu(first.forward(bind, x))); }

void Mlp::collect(std::vector<Parameter*>& out) {
  first.collect(out);
  second.collect(out);
}

std::size_t count_values(const std::vector<Parameter*>& params) {
  std::size_t n = 0;
  for (const Parameter* p : params) n += p->value.size();
  return n;
}

}  // namespace danmaku
