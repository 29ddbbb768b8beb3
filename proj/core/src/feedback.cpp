#include "babble/feedback.hpp"

#include <algorithm>
#include <numeric>

namespace babble {

std::optional<std::size_t> positive_pair_index(const FeedbackSignal& signal) {
  for (std::size_t i = 0; i < kPositivePairs.size(); ++i) {
    if (kPositivePairs[i] == signal) return i;
  }
  return std::nullopt;
}

FeedbackMap dot_feedback_map() {
  FeedbackMap map;
  map.condition = FeedbackCondition::DOT;
  map.pair_for_need[index_of(NeedKind::Curiosity)] = 0;
  map.pair_for_need[index_of(NeedKind::Hunger)] = 1;
  map.pair_for_need[index_of(NeedKind::Thirst)] = 2;
  return map;
}

FeedbackMap nondot_feedback_map(bool fixed_shuffle, Rng& rng) {
  FeedbackMap map;
  map.condition = FeedbackCondition::NonDOT;
  map.fixed_shuffle = fixed_shuffle;
  if (fixed_shuffle) {
    std::iota(map.pair_for_need.begin(), map.pair_for_need.end(), std::size_t{0});
    std::shuffle(map.pair_for_need.begin(), map.pair_for_need.end(), rng);
  }
  return map;
}

FeedbackSignal positive_feedback(const FeedbackMap& map, NeedKind need, Rng& rng) {
  if (map.condition == FeedbackCondition::DOT || map.fixed_shuffle) {
    return kPositivePairs[map.pair_for_need[index_of(need)]];
  }
  return kPositivePairs[uniform_index(rng, kPositivePairs.size())];
}

FeedbackSignal negative_feedback() {
  return {Valence::Negative, MotionToken::LookDownLowerAntennae, SoundToken::SadTone};
}

std::string_view to_string(MotionToken token) {
  switch (token) {
    case MotionToken::WagAntennae: return "wag_antennae";
    case MotionToken::ArmWave: return "arm_wave";
    case MotionToken::NodHead: return "nod_head";
    case MotionToken::LookDownLowerAntennae: return "look_down_lower_antennae";
  }
  return "?";
}

std::string_view to_string(SoundToken token) {
  switch (token) {
    case SoundToken::HappyBeepA: return "happy_beep_a";
    case SoundToken::HappyBeepB: return "happy_beep_b";
    case SoundToken::HappyBeepC: return "happy_beep_c";
    case SoundToken::SadTone: return "sad_tone";
  }
  return "?";
}

std::string_view to_string(Valence valence) {
  return valence == Valence::Positive ? "positive" : "negative";
}

std::string_view to_string(FeedbackCondition condition) {
  return condition == FeedbackCondition::DOT ? "dot" : "nondot";
}

std::optional<MotionToken> parse_motion(std::string_view text) {
  for (auto t : {MotionToken::WagAntennae, MotionToken::ArmWave, MotionToken::NodHead,
                 MotionToken::LookDownLowerAntennae}) {
    if (to_string(t) == text) return t;
  }
  return std::nullopt;
}

std::optional<SoundToken> parse_sound(std::string_view text) {
  for (auto t : {SoundToken::HappyBeepA, SoundToken::HappyBeepB, SoundToken::HappyBeepC,
                 SoundToken::SadTone}) {
    if (to_string(t) == text) return t;
  }
  return std::nullopt;
}

std::optional<Valence> parse_valence(std::string_view text) {
  if (text == "positive") return Valence::Positive;
  if (text == "negative") return Valence::Negative;
  return std::nullopt;
}

std::optional<FeedbackCondition> parse_condition(std::string_view text) {
  if (text == "dot") return FeedbackCondition::DOT;
  if (text == "nondot") return FeedbackCondition::NonDOT;
  return std::nullopt;
}

}  // namespace babble
