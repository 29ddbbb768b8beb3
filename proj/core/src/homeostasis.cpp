#include "babble/homeostasis.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace babble {

ExpressionThreshold::ExpressionThreshold(double theta) : theta_(theta) {
  if (!(theta > 0.0 && theta < 2.0)) {
    throw std::invalid_argument("expression threshold must lie in (0, 2)");
  }
}

void validate(const HomeostaticState& state) {
  for (std::size_t i = 0; i < kNeedCount; ++i) {
    if (!(state.level[i] >= 0.0 && state.level[i] <= 1.0))
      throw std::invalid_argument("homeostatic level outside [0, 1]");
    if (!(state.optimal[i] >= 0.0 && state.optimal[i] <= 1.0))
      throw std::invalid_argument("optimal level outside [0, 1]");
    if (!(state.decay_rate[i] >= 0.0)) throw std::invalid_argument("negative decay rate");
    if (!(state.satiation_gain[i] >= 0.0)) throw std::invalid_argument("negative satiation gain");
  }
}

HomeostaticState decay_step(HomeostaticState state) {
  for (std::size_t i = 0; i < kNeedCount; ++i) {
    state.level[i] = std::clamp(state.level[i] - state.decay_rate[i], 0.0, 1.0);
  }
  return state;
}

HomeostaticState satisfy(HomeostaticState state, NeedKind need) {
  const auto i = index_of(need);
  state.level[i] = std::clamp(state.level[i] + state.satiation_gain[i], 0.0, 1.0);
  return state;
}

Drive compute_drive(const HomeostaticState& state, NeedKind need) {
  const auto i = index_of(need);
  return {need, std::max(0.0, state.optimal[i] - state.level[i])};
}

Motivation compute_motivation(Drive drive, StimulusIntensity stimulus) {
  return {drive.need, drive.value + drive.value * stimulus.value};
}

std::optional<NeedKind> select_expressed_need(std::span<const Motivation> motivations,
                                              ExpressionThreshold theta, Rng& rng) {
  if (motivations.size() != kNeedCount) {
    throw std::invalid_argument("select_expressed_need expects one motivation per need");
  }
  double best = -1.0;
  std::vector<NeedKind> tied;
  for (const Motivation& m : motivations) {
    if (m.value < theta.value()) continue;
    if (m.value > best) {
      best = m.value;
      tied.assign(1, m.need);
    } else if (m.value == best) {
      tied.push_back(m.need);
    }
  }
  if (tied.empty()) return std::nullopt;
  if (tied.size() == 1) return tied.front();
  // Order ties by the fixed need ordering so the draw does not depend on input order.
  std::sort(tied.begin(), tied.end());
  return tied[uniform_index(rng, tied.size())];
}

}  // namespace babble
