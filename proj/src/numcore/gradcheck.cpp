#include "aapl/numcore/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "aapl/error.hpp"
#include "aapl/numcore/tape.hpp"

namespace aapl::numcore {

namespace {

double evaluate(const std::function<Tensor()>& loss_fn) {
  NoGradGuard no_grad;
  return loss_fn().item();
}

}  // namespace

GradCheckResult finite_difference_check(const std::function<Tensor()>& loss_fn,
                                        std::vector<Tensor> params, double step,
                                        double kink_tolerance) {
  if (!(step > 0.0)) throw ConfigError("finite_difference_check: step must be > 0");

  GradCheckResult result;
  double base = 0.0;
  {
    KinkProbe probe;
    base = evaluate(loss_fn);
    result.kink_distance = probe.min_distance();
  }
  if (evaluate(loss_fn) != base) {
    throw StateError("finite_difference_check: loss function is not deterministic");
  }
  result.near_kink = result.kink_distance < kink_tolerance;

  for (auto& p : params) p.clear_grad();
  {
    Tape tape;
    auto loss = loss_fn();
    tape.backward(loss);
  }

  for (auto& p : params) {
    std::vector<double> analytic = p.has_grad()
                                       ? std::vector<double>(p.grad().begin(), p.grad().end())
                                       : std::vector<double>(p.numel(), 0.0);
    auto w = p.mutable_data();
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double saved = w[i];
      w[i] = saved + step;
      const double up = evaluate(loss_fn);
      w[i] = saved - step;
      const double down = evaluate(loss_fn);
      w[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double err = std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(numeric));
      result.max_relative_error = std::max(result.max_relative_error, err);
      ++result.coordinates;
    }
    p.clear_grad();
  }
  return result;
}

}  // namespace aapl::numcore
