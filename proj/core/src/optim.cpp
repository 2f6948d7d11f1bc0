#include "danmaku/optim.hpp"

#include <cmath>

#include "danmaku/error.hpp"

namespace danmaku {

Optimizer::Optimizer(std::vector<Parameter*> params) : params_(std::move(params)) {
  for (Parameter* p : params_) {
    if (p->grad.shape() != p->value.shape()) p->zero_grad();
    first_moment_.emplace_back(p->value.shape());
    second_moment_.emplace_back(p->value.shape());
  }
}

void Optimizer::step() {
  for (const Parameter* p : params_) {
    if (!p->grad.all_finite()) throw NumericError("optimizer: non-finite gradient in parameter '" + p->name + "'");
  }
  ++steps_;
  for (std::size_t i = 0; i < params_.size(); ++i) update(i, *params_[i]);
}

void Optimizer::zero_grad() {
  for (Parameter* p : params_) p->grad.fill(0.0);
}

Adam::Adam(std::vector<Parameter*> params, AdamConfig config) : Optimizer(std::move(params)), config_(config) {}

void Adam::update(std::size_t index, Parameter& p) {
  Tensor& m = first_moment_[index];
  Tensor& v = second_moment_[index];
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  for (std::size_t k = 0; k < p.value.size(); ++k) {
    const double g = p.grad[k];
    m[k] = b1 * m[k] + (1.0 - b1) * g;
    v[k] = b2 * v[k] + (1.0 - b2) * g * g;
    p.value[k] -= config_.learning_rate * (m[k] / c1) / (std::sqrt(v[k] / c2) + config_.epsilon);
  }
}

Rmsprop::Rmsprop(std::vector<Parameter*> params, RmspropConfig config)
    : Optimizer(std::move(params)), config_(config) {}

void Rmsprop::update(std::size_t index, Parameter& p) {
  Tensor& v = second_moment_[index];
  const double d = config_.decay;
  for (std::size_t k = 0; k < p.value.size(); ++k) {
    const double g = p.grad[k];
    v[k] = d * v[k] + (1.0 - d) * g * g;
    p.value[k] -= config_.learning_rate * g / (std::sqrt(v[k]) + config_.epsilon);
  }
}

}  // namespace danmaku
