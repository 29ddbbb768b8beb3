#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

#include "babble/needs.hpp"
#include "babble/random.hpp"

namespace babble {

enum class MotionToken : std::uint8_t { WagAntennae, ArmWave, NodHead, LookDownLowerAntennae };
enum class SoundToken : std::uint8_t { HappyBeepA, HappyBeepB, HappyBeepC, SadTone };
enum class Valence : std::uint8_t { Positive, Negative };
enum class FeedbackCondition : std::uint8_t { DOT, NonDOT };

struct FeedbackSignal {
  Valence valence;
  MotionToken motion;
  SoundToken sound;

  friend bool operator==(const FeedbackSignal&, const FeedbackSignal&) = default;
};

inline constexpr std::size_t kPositivePairCount = 3;

/// The three positive composite signals, in a fixed order:
/// (wag_antennae, happy_beep_a), (arm_wave, happy_beep_b), (nod_head, happy_beep_c).
inline constexpr std::array<FeedbackSignal, kPositivePairCount> kPositivePairs{{
    {Valence::Positive, MotionToken::WagAntennae, SoundToken::HappyBeepA},
    {Valence::Positive, MotionToken::ArmWave, SoundToken::HappyBeepB},
    {Valence::Positive, MotionToken::NodHead, SoundToken::HappyBeepC},
}};

/// Index into kPositivePairs, or nullopt for the negative signal.
std::optional<std::size_t> positive_pair_index(const FeedbackSignal& signal);

struct FeedbackMap {
  FeedbackCondition condition = FeedbackCondition::DOT;
  // Need -> index into kPositivePairs. Used in DOT, and in NonDOT only when
  // fixed_shuffle is set.
  PerNeed<std::size_t> pair_for_need{1, 2, 0};
  bool fixed_shuffle = false;
};

/// DOT: curiosity -> wag/beep A, hunger -> arm wave/beep B, thirst -> nod/beep C.
FeedbackMap dot_feedback_map();

/// NonDOT map. With `fixed_shuffle` a random need->pair permutation is drawn
/// once from `rng`; otherwise every success draws a fresh pair.
FeedbackMap nondot_feedback_map(bool fixed_shuffle, Rng& rng);

FeedbackSignal positive_feedback(const FeedbackMap& map, NeedKind need, Rng& rng);
FeedbackSignal negative_feedback();

std::string_view to_string(MotionToken token);
std::string_view to_string(SoundToken token);
std::string_view to_string(Valence valence);
std::string_view to_string(FeedbackCondition condition);
std::optional<MotionToken> parse_motion(std::string_view text);
std::optional<SoundToken> parse_sound(std::string_view text);
std::optional<Valence> parse_valence(std::string_view text);
std::optional<FeedbackCondition> parse_condition(std::string_view text);

}  // namespace babble
