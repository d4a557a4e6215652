#pragma once

#include <cstddef>
#include <vector>

#include "aapl/numcore/tensor.hpp"

namespace aapl::numcore {

enum class LrSchedule { kConstant, kCosine };

/// SGD with heavy-ball momentum: v <- momentum*v + grad, p <- p - lr*v.
/// Gradients are zeroed after every step.
class SgdMomentum {
 public:
  SgdMomentum(std::vector<Tensor> params, double learning_rate, double momentum = 0.9,
              LrSchedule schedule = LrSchedule::kConstant, std::size_t total_steps = 1);

  void step();
  void zero_grad();

  // Learning rate that the next step() will use.
  double current_lr() const { return lr_at(step_); }
  double lr_at(std::size_t step) const;

  std::size_t steps_taken() const { return step_; }
  const std::vector<std::vector<double>>& velocities() const { return velocity_; }
  const std::vector<Tensor>& params() const { return params_; }

 private:
  std::vector<Tensor> params_;
  std::vector<std::vector<double>> velocity_;
  double base_lr_;
  double momentum_;
  LrSchedule schedule_;
  std::size_t total_steps_;
  std::size_t step_ = 0;
};

}  // namespace aapl::numcore
