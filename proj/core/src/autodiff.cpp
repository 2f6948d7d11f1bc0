#include "danmaku/autodiff.hpp"

#include <algorithm>

#include "danmaku/error.hpp"

namespace danmaku {

const Tensor& Var::value() const { return tape_->value(index_); }
const Tensor& Var::grad() const { return tape_->grad(index_); }
bool Var::requires_grad() const { return tape_->requires_grad(index_); }

const Tensor& Tape::value(std::uint32_t i) const {
  const Node& n = nodes_[i];
  return n.external ? *n.external : n.value;
}

Tensor& Tape::grad_buffer(std::uint32_t i) {
  Node& n = nodes_[i];
  if (n.grad.empty()) n.grad = Tensor(value(i).shape());
  return n.grad;
}

Var Tape::push(Node node) {
  if (nodes_.size() >= UINT32_MAX) throw Error("tape: node limit reached");
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Var Tape::constant(Tensor value) {
  Node n;
  n.value = std::move(value);
  n.op = "constant";
  return push(std::move(n));
}

Var Tape::parameter(Parameter& param, bool trainable) {
  Node n;
  n.external = &param.value;
  n.requires_grad = trainable;
  n.param = trainable ? &param : nullptr;
  n.op = "parameter";
  return push(std::move(n));
}

Var Tape::frozen(const Parameter& param) {
  Node n;
  n.external = &param.value;
  n.op = "frozen";
  return push(std::move(n));
}

Var Tape::record(Tensor value, std::initializer_list<Var> inputs, BackwardFn fn, const char* op_name) {
  if (!value.all_finite()) throw NumericError(std::string("non-finite value produced by ") + op_name);
  Node n;
  n.value = std::move(value);
  n.op = op_name;
  for (const Var& v : inputs) {
    if (v.tape_ != this) throw Error(std::string(op_name) + ": input recorded on a different tape");
    if (nodes_[v.index_].requires_grad) n.requires_grad = true;
  }
  if (n.requires_grad) n.backward = std::move(fn);
  return push(std::move(n));
}

void Tape::backward(Var loss) {
  if (loss.tape_ != this) throw Error("backward: loss belongs to a different tape");
  if (backward_done_) throw Error("backward: already run on this recording; clear() the tape first");
  if (value(loss.index_).size() != 1) {
    throw ShapeError("backward: loss must be a scalar, got shape " + shape_string(value(loss.index_).shape()));
  }
  backward_done_ = true;
  if (!nodes_[loss.index_].requires_grad) return;
  grad_buffer(loss.index_)[0] = 1.0;
  for (std::uint32_t i = loss.index_ + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || n.grad.empty()) continue;
    if (!n.grad.all_finite()) throw NumericError(std::string("non-finite gradient flowing into ") + n.op);
    if (n.backward) n.backward(*this, i);
    if (n.param) {
      Parameter& p = *n.param;
      if (p.grad.shape() != p.value.shape()) p.grad = Tensor(p.value.shape());
      double* g = p.grad.data();
      const double* src = n.grad.data();
      for (std::size_t k = 0; k < p.grad.size(); ++k) g[k] += src[k];
    }
  }
}

void Tape::clear() {
  nodes_.clear();
  backward_done_ = false;
}

}  // namespace danmaku
