#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "aapl/numcore/tensor.hpp"

namespace aapl::numcore {

/// Reverse-mode gradient tape.
///
/// Constructing a Tape installs it as the recording target for the calling
/// thread; destroying it restores whatever was installed before. Ops record
/// themselves only when a tape is installed on the current thread and at least
/// one operand requires grad, so threads without a tape evaluate values only.
///
/// A tape supports exactly one backward() per forward pass.
class Tape {
 public:
  using BackwardFn = std::function<void(const TensorImpl& out)>;

  Tape();
  ~Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  static Tape* current();

  void record(std::shared_ptr<TensorImpl> output, std::vector<std::shared_ptr<TensorImpl>> inputs,
              BackwardFn backward);

  // Populates .grad on every requires_grad tensor reachable from loss.
  // Leaf gradients accumulate into whatever is already there.
  void backward(const Tensor& loss);

  std::size_t size() const { return entries_.size(); }
  bool consumed() const { return consumed_; }

 private:
  struct Entry {
    std::shared_ptr<TensorImpl> output;
    std::vector<std::shared_ptr<TensorImpl>> inputs;
    BackwardFn backward;
  };

  std::vector<Entry> entries_;
  bool consumed_ = false;
  Tape* previous_ = nullptr;
};

/// Suspends recording on the current thread for the guard's lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool recording_enabled();

/// Tracks how close any non-differentiable point (relu input, hinge input,
/// norm of a zero vector) came to being hit while the probe is alive.
class KinkProbe {
 public:
  KinkProbe();
  ~KinkProbe();
  KinkProbe(const KinkProbe&) = delete;
  KinkProbe& operator=(const KinkProbe&) = delete;

  double min_distance() const { return min_distance_; }
  void reset();

  static void observe(double distance_to_kink);

 private:
  double min_distance_;
  KinkProbe* previous_;
};

}  // namespace aapl::numcore
