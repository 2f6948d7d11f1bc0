#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "danmaku/autodiff.hpp"
#include "danmaku/rng.hpp"
#include "danmaku/tensor.hpp"

namespace testing {

inline danmaku::Tensor random_tensor(danmaku::Shape shape, danmaku::Rng& rng, double lo = -1.0, double hi = 1.0) {
  danmaku::Tensor t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

/// Builds a scalar loss from the bound inputs.
using LossFn = std::function<danmaku::Var(danmaku::Tape&, std::vector<danmaku::Var>&)>;

/// Max over inputs of ||analytic - numeric|| / max(||analytic|| + ||numeric||, 1e-8)
/// using central differences with step h.
inline double gradient_error(std::vector<danmaku::Parameter>& inputs, const LossFn& loss, double h = 1e-5) {
  using namespace danmaku;
  for (auto& p : inputs) p.zero_grad();
  {
    Tape tape;
    std::vector<Var> vars;
    for (auto& p : inputs) vars.push_back(tape.parameter(p));
    tape.backward(loss(tape, vars));
  }
  auto eval = [&] {
    Tape tape;
    std::vector<Var> vars;
    for (auto& p : inputs) vars.push_back(tape.frozen(p));
    return loss(tape, vars).value()[0];
  };
  double worst = 0.0;
  for (auto& p : inputs) {
    double diff = 0.0, na = 0.0, nn = 0.0;
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double keep = p.value[i];
      p.value[i] = keep + h;
      const double up = eval();
      p.value[i] = keep - h;
      const double down = eval();
      p.value[i] = keep;
      const double numeric = (up - down) / (2.0 * h);
      diff += (p.grad[i] - numeric) * (p.grad[i] - numeric);
      na += p.grad[i] * p.grad[i];
      nn += numeric * numeric;
    }
    worst = std::max(worst, std::sqrt(diff) / std::max(std::sqrt(na) + std::sqrt(nn), 1e-8));
  }
  return worst;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("danmaku_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing
