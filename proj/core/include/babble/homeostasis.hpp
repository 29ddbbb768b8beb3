#pragma once

#include <optional>
#include <span>

#include "babble/needs.hpp"
#include "babble/random.hpp"

namespace babble {

/// Three decaying homeostatic variables. Levels live in [0, 1] where 1.0 is
/// fully satiated; every operation clamps back into that range.
struct HomeostaticState {
  PerNeed<double> level{1.0, 1.0, 1.0};
  PerNeed<double> optimal{1.0, 1.0, 1.0};
  PerNeed<double> decay_rate{0.1, 0.1, 0.1};
  PerNeed<double> satiation_gain{1.0, 1.0, 1.0};

  double level_of(NeedKind need) const { return level[index_of(need)]; }
};

struct Drive {
  NeedKind need;
  double value;
};

struct StimulusIntensity {
  NeedKind need;
  double value;
};

struct Motivation {
  NeedKind need;
  double value;
};

/// Motivation level at which a need gets expressed. Must lie in (0, 2).
class ExpressionThreshold {
 public:
  explicit ExpressionThreshold(double theta);
  double value() const noexcept { return theta_; }

 private:
  double theta_;
};

/// Throws std::invalid_argument on negative rates or out-of-range levels.
void validate(const HomeostaticState& state);

HomeostaticState decay_step(HomeostaticState state);
HomeostaticState satisfy(HomeostaticState state, NeedKind need);

// max(0, optimal - level)
Drive compute_drive(const HomeostaticState& state, NeedKind need);

// m = d + d * s
Motivation compute_motivation(Drive drive, StimulusIntensity stimulus);

/// Strongest motivation at or above the threshold; exact ties are broken by a
/// uniform draw from `rng`. Expects one entry per need.
std::optional<NeedKind> select_expressed_need(std::span<const Motivation> motivations,
                                              ExpressionThreshold theta, Rng& rng);

}  // namespace babble
