#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "danmaku/tensor.hpp"

namespace danmaku {

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; only valid while the
/// tape that produced it is alive and has not been cleared.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  const Tensor& grad() const;
  const Shape& shape() const { return value().shape(); }
  bool requires_grad() const;

  Tape& tape() const { return *tape_; }
  std::uint32_t index() const { return index_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::uint32_t index) : tape_(tape), index_(index) {}

  Tape* tape_ = nullptr;
  std::uint32_t index_ = 0;
};

/// Define-by-run reverse-mode tape. Nodes are appended in evaluation order,
/// so reverse insertion order is a valid topological order and the recorded
/// graph cannot contain a cycle.
///
/// backward() may run once per recording; call clear() before recording the
/// next step.
class Tape {
 public:
  /// Accumulates the node's output gradient into its inputs' gradients.
  using BackwardFn = std::function<void(Tape&, std::uint32_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  /// Leaf that reads `param.value` in place. backward() adds into
  /// `param.grad` unless `trainable` is false.
  Var parameter(Parameter& param, bool trainable = true);
  /// Read-only view of a parameter; never receives gradient.
  Var frozen(const Parameter& param);

  /// Records an op output. `inputs` decide whether the node needs gradient;
  /// `fn` is dropped when none of them do.
  Var record(Tensor value, std::initializer_list<Var> inputs, BackwardFn fn, const char* op_name);

  /// Seeds d(loss)/d(loss) = 1 and propagates to every reachable node.
  void backward(Var loss);

  void clear();
  std::size_t size() const { return nodes_.size(); }
  bool backward_done() const { return backward_done_; }

  // Used by op implementations.
  const Tensor& value(std::uint32_t i) const;
  const Tensor& grad(std::uint32_t i) const { return nodes_[i].grad; }
  bool requires_grad(std::uint32_t i) const { return nodes_[i].requires_grad; }
  /// Gradient buffer of node `i`, allocated as zeros on first use.
  Tensor& grad_buffer(std::uint32_t i);

 private:
  struct Node {
    Tensor value;
    const Tensor* external = nullptr;
    Tensor grad;
    bool requires_grad = false;
    Parameter* param = nullptr;
    BackwardFn backward;
    const char* op = "";
  };

  Var push(Node node);

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

}  // namespace danmaku
