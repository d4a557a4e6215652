#include "aapl/numcore/optim.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "aapl/error.hpp"

namespace aapl::numcore {

SgdMomentum::SgdMomentum(std::vector<Tensor> params, double learning_rate, double momentum,
                         LrSchedule schedule, std::size_t total_steps)
    : params_(std::move(params)),
      base_lr_(learning_rate),
      momentum_(momentum),
      schedule_(schedule),
      total_steps_(total_steps) {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("sgd: learning rate must be finite and >= 0");
  }
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("sgd: momentum must be in [0,1)");
  if (total_steps == 0) throw ConfigError("sgd: total_steps must be positive");
  velocity_.reserve(params_.size());
  for (const auto& p : params_) velocity_.emplace_back(p.numel(), 0.0);
}

double SgdMomentum::lr_at(std::size_t step) const {
  if (schedule_ == LrSchedule::kConstant) return base_lr_;
  const double t = std::min<double>(static_cast<double>(step), static_cast<double>(total_steps_));
  return 0.5 * base_lr_ * (1.0 + std::cos(std::numbers::pi * t / static_cast<double>(total_steps_)));
}

void SgdMomentum::step() {
  for (std::size_t k = 0; k < params_.size(); ++k) {
    if (!params_[k].has_grad()) {
      throw StateError("sgd: parameter " + std::to_string(k) + " has no gradient");
    }
  }
  const double lr = lr_at(step_);
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto& p = params_[k];
    auto w = p.mutable_data();
    auto g = p.grad();
    auto& v = velocity_[k];
    for (std::size_t i = 0; i < w.size(); ++i) {
      v[i] = momentum_ * v[i] + g[i];
      w[i] -= lr * v[i];
    }
  }
  zero_grad();
  ++step_;
}

void SgdMomentum::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

}  // namespace aapl::numcore
