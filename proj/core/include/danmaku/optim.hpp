#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "danmaku/tensor.hpp"

namespace danmaku {

enum class OptimizerKind { adam, rmsprop };

struct AdamConfig {
  double learning_rate = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct RmspropConfig {
  double learning_rate = 2e-3;
  double decay = 0.9;
  double epsilon = 1e-8;
};

/// Updates a fixed set of parameters from their accumulated gradients.
/// Moment buffers are created on construction, one per parameter.
class Optimizer {
 public:
  explicit Optimizer(std::vector<Parameter*> params);
  virtual ~Optimizer() = default;

  /// Applies one update and increments step_count(). Throws NumericError
  /// naming the parameter if any gradient is NaN/Inf; nothing is modified
  /// in that case.
  void step();
  void zero_grad();

  virtual OptimizerKind kind() const = 0;
  std::size_t step_count() const { return steps_; }
  const std::vector<Parameter*>& parameters() const { return params_; }

 protected:
  virtual void update(std::size_t index, Parameter& p) = 0;

  std::vector<Parameter*> params_;
  std::vector<Tensor> first_moment_;
  std::vector<Tensor> second_moment_;
  std::size_t steps_ = 0;
};

/// Adam with bias-corrected moments.
class Adam final : public Optimizer {
 public:
  Adam(std::vector<Parameter*> params, AdamConfig config);
  OptimizerKind kind() const override { return OptimizerKind::adam; }
  const AdamConfig& config() const { return config_; }

 private:
  void update(std::size_t index, Parameter& p) override;
  AdamConfig config_;
};

/// RMSprop: v <- decay*v + (1-decay)*g^2; p <- p - lr*g/(sqrt(v)+eps).
class Rmsprop final : public Optimizer {
 public:
  Rmsprop(std::vector<Parameter*> params, RmspropConfig config);
  OptimizerKind kind() const override { return OptimizerKind::rmsprop; }
  const RmspropConfig& config() const { return config_; }

 private:
  void update(std::size_t index, Parameter& p) override;
  RmspropConfig config_;
};

}  // namespace danmaku
