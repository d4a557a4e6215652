#pragma once

#include <cstddef>
#include <string_view>
#include <optional>

#include "aapl/numcore/tensor.hpp"
#include "aapl/promptcore/prompt_model.hpp"

namespace aapl::losses {

using numcore::Tensor;
using promptcore::DeltaMetaToken;

enum class ConstraintMode { kConstraints2, kConstraints4 };

std::string_view constraint_mode_name(ConstraintMode mode);  // "c2" / "c4"
std::optional<ConstraintMode> parse_constraint_mode(std::string_view name);

struct TripletConfig {
  double margin = 0.2;
  ConstraintMode mode = ConstraintMode::kConstraints4;
};

struct LossWeights {
  double alpha = 0.2;  // AdTriplet
  double beta = 1.0;   // cross-entropy
};

void validate(const TripletConfig& cfg);
void validate(const LossWeights& w);

inline constexpr double kProbabilityFloor = 1e-12;

// -log(probs[label]); a probability below kProbabilityFloor is clamped to it
// (gradient becomes zero) and counted in clamp_warnings().
Tensor cross_entropy(const Tensor& probs, int label);
std::size_t clamp_warnings();
void reset_clamp_warnings();

// max(0, |a-p| - |a-n| + margin)
Tensor triplet(const Tensor& anchor, const Tensor& positive, const Tensor& negative, double margin);

/// Four delta meta tokens of one episode: classes {1,2} x augmentations {A,B}.
struct DeltaGrid {
  DeltaMetaToken d1a, d1b, d2a, d2b;
};

// Throws ConfigError if the labels do not form a complete 2x2 grid.
void validate(const DeltaGrid& grid);

/// Positives share the augmentation, negatives share the class.
///   constraints-4: T(1A, 2A, 1B) + T(2B, 1B, 2A)
///   constraints-2: T(1B, 2B, 1A)
Tensor adtriplet(const DeltaGrid& grid, const TripletConfig& cfg);

// alpha * adtriplet + beta * ce
Tensor total_loss(const Tensor& ce, const Tensor& adtriplet, const LossWeights& w);

}  // namespace aapl::losses
