#pragma once

#include <functional>
#include <vector>

#include "aapl/numcore/tensor.hpp"

namespace aapl::numcore {

struct GradCheckResult {
  double max_relative_error = 0.0;
  // Smallest distance of any relu/hinge/norm input to its non-differentiable
  // point seen at the base evaluation.
  double kink_distance = 0.0;
  bool near_kink = false;
  std::size_t coordinates = 0;
};

/// Compares the tape gradient of `loss_fn` against central differences for
/// every coordinate of `params`.
///
/// Error per coordinate is |analytic - numeric| / max(1, |numeric|). When the
/// base point sits within `kink_tolerance` of a kink the result is flagged
/// near_kink and should be excluded from pass/fail decisions.
/// Throws StateError if two baseline evaluations disagree.
GradCheckResult finite_difference_check(const std::function<Tensor()>& loss_fn,
                                        std::vector<Tensor> params, double step = 1e-5,
                                        double kink_tolerance = 1e-3);

}  // namespace aapl::numcore
