#include "aapl/losses/losses.hpp"

#include <atomic>
#include <cmath>
#include <string>

#include "aapl/error.hpp"
#include "aapl/numcore/ops.hpp"

namespace aapl::losses {

namespace ops = numcore::ops;

namespace {
std::atomic<std::size_t> g_clamp_warnings{0};

void require_finite_scalar(const Tensor& t, const char* what) {
  if (!t.is_scalar()) throw ShapeError(std::string("total_loss: ") + what + " is not a scalar");
  if (!std::isfinite(t.item())) throw NumericError(std::string("total_loss: ") + what + " is not finite");
}
}  // namespace

std::string_view constraint_mode_name(ConstraintMode mode) {
  return mode == ConstraintMode::kConstraints2 ? "c2" : "c4";
}

std::optional<ConstraintMode> parse_constraint_mode(std::string_view name) {
  if (name == "c2" || name == "constraints2") return ConstraintMode::kConstraints2;
  if (name == "c4" || name == "constraints4") return ConstraintMode::kConstraints4;
  return std::nullopt;
}

void validate(const TripletConfig& cfg) {
  if (!std::isfinite(cfg.margin) || cfg.margin < 0.0) {
    throw ConfigError("triplet margin must be finite and >= 0");
  }
}

void validate(const LossWeights& w) {
  if (!(w.alpha >= 0.0) || !(w.beta >= 0.0) || !std::isfinite(w.alpha) || !std::isfinite(w.beta)) {
    throw ConfigError("loss weights must be finite and >= 0");
  }
  if (w.alpha == 0.0 && w.beta == 0.0) throw ConfigError("loss weights alpha and beta are both zero");
}

Tensor cross_entropy(const Tensor& probs, int label) {
  if (probs.rank() != 1) throw ShapeError("cross_entropy: probabilities must be a vector");
  if (label < 0 || static_cast<std::size_t>(label) >= probs.numel()) {
    throw ConfigError("cross_entropy: label " + std::to_string(label) + " out of range");
  }
  auto p = ops::pick(probs, static_cast<std::size_t>(label));
  if (p.item() < kProbabilityFloor) {
    g_clamp_warnings.fetch_add(1, std::memory_order_relaxed);
    return Tensor::scalar(-std::log(kProbabilityFloor));
  }
  return ops::scale(ops::log(p), -1.0);
}

std::size_t clamp_warnings() { return g_clamp_warnings.load(std::memory_order_relaxed); }
void reset_clamp_warnings() { g_clamp_warnings.store(0, std::memory_order_relaxed); }

Tensor triplet(const Tensor& anchor, const Tensor& positive, const Tensor& negative, double margin) {
  auto pos = ops::euclidean_distance(anchor, positive);
  auto neg = ops::euclidean_distance(anchor, negative);
  return ops::max0(ops::add_scalar(ops::sub(pos, neg), margin));
}

void validate(const DeltaGrid& g) {
  const bool classes_ok = g.d1a.class_id == g.d1b.class_id && g.d2a.class_id == g.d2b.class_id &&
                          g.d1a.class_id != g.d2a.class_id;
  const bool augs_ok = g.d1a.augmentation == g.d2a.augmentation &&
                       g.d1b.augmentation == g.d2b.augmentation &&
                       g.d1a.augmentation != g.d1b.augmentation;
  if (!classes_ok || !augs_ok) {
    throw ConfigError("adtriplet: deltas do not form a 2 class x 2 augmentation grid");
  }
}

Tensor adtriplet(const DeltaGrid& g, const TripletConfig& cfg) {
  validate(g);
  validate(cfg);
  if (cfg.mode == ConstraintMode::kConstraints2) {
    return triplet(g.d1b.value, g.d2b.value, g.d1a.value, cfg.margin);
  }
  auto first = triplet(g.d1a.value, g.d2a.value, g.d1b.value, cfg.margin);
  auto second = triplet(g.d2b.value, g.d1b.value, g.d2a.value, cfg.margin);
  return ops::add(first, second);
}

Tensor total_loss(const Tensor& ce, const Tensor& adtriplet, const LossWeights& w) {
  validate(w);
  require_finite_scalar(ce, "cross-entropy term");
  require_finite_scalar(adtriplet, "AdTriplet term");
  return ops::add(ops::scale(adtriplet, w.alpha), ops::scale(ce, w.beta));
}

}  // namespace aapl::losses
