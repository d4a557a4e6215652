#include "aapl/numcore/tape.hpp"

#include <cmath>
#include <limits>

#include "aapl/error.hpp"

namespace aapl::numcore {

namespace {
thread_local Tape* current_tape = nullptr;
thread_local bool grad_enabled = true;
thread_local KinkProbe* current_probe = nullptr;
}  // namespace

Tape::Tape() : previous_(current_tape) { current_tape = this; }

Tape::~Tape() {
  if (current_tape == this) current_tape = previous_;
}

Tape* Tape::current() { return current_tape; }

void Tape::record(std::shared_ptr<TensorImpl> output,
                  std::vector<std::shared_ptr<TensorImpl>> inputs, BackwardFn backward) {
  if (consumed_) throw StateError("tape: recording onto a tape that already ran backward");
  entries_.push_back({std::move(output), std::move(inputs), std::move(backward)});
}

void Tape::backward(const Tensor& loss) {
  if (consumed_) throw StateError("tape: backward already ran; run a new forward pass first");
  if (entries_.empty()) throw StateError("tape: backward on an empty tape");
  if (!loss.is_scalar()) {
    throw ShapeError("tape: backward needs a scalar loss, got " + shape_to_string(loss.shape()));
  }
  const auto& root = loss.impl();
  if (!root->requires_grad) throw StateError("tape: loss does not depend on any parameter");

  // Intermediate grads start fresh; leaves keep what they already hold.
  for (auto& e : entries_) e.output->grad.assign(e.output->data.size(), 0.0);
  for (auto& e : entries_) {
    for (auto& in : e.inputs) {
      if (in->requires_grad && in->grad.empty()) in->grad.assign(in->data.size(), 0.0);
    }
  }
  root->grad.assign(1, 1.0);

  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    auto& out = *it->output;
    bool any = false;
    for (double g : out.grad) {
      if (g != 0.0) {
        any = true;
        break;
      }
    }
    if (any) it->backward(out);
  }

  for (auto& e : entries_) {
    for (auto& in : e.inputs) {
      for (double g : in->grad) {
        if (!std::isfinite(g)) throw NumericError("tape: non-finite gradient after backward");
      }
    }
  }
  consumed_ = true;
}

NoGradGuard::NoGradGuard() : previous_(grad_enabled) { grad_enabled = false; }
NoGradGuard::~NoGradGuard() { grad_enabled = previous_; }

bool recording_enabled() { return grad_enabled && current_tape != nullptr; }

KinkProbe::KinkProbe()
    : min_distance_(std::numeric_limits<double>::infinity()), previous_(current_probe) {
  current_probe = this;
}

KinkProbe::~KinkProbe() {
  if (current_probe == this) current_probe = previous_;
}

void KinkProbe::reset() { min_distance_ = std::numeric_limits<double>::infinity(); }

void KinkProbe::observe(double distance_to_kink) {
  for (auto* p = current_probe; p != nullptr; p = p->previous_) {
    if (distance_to_kink < p->min_distance_) p->min_distance_ = distance_to_kink;
  }
}

}  // namespace aapl::numcore
