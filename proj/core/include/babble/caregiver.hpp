#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "babble/feedback.hpp"
#include "babble/language.hpp"
#include "babble/needs.hpp"
#include "babble/random.hpp"

namespace babble {

enum class CaregiverKind : std::uint8_t { Oracle, Random, Associative };

std::string_view to_string(CaregiverKind kind);
std::optional<CaregiverKind> parse_caregiver_kind(std::string_view text);

struct AssociativeParams {
  double alpha_a = 0.3;    // word -> object
  double alpha_e = 0.5;    // word -> expected outcome
  double alpha_o = 0.5;    // outcome -> object
  double lambda = 1.0;     // weight of the outcome route
  double tau = 0.25;       // response softmax temperature
  double retention = 0.9;  // per-trial decay applied to the direct route only
};

void validate(const AssociativeParams& params);

using ObjectStrengths = std::array<double, kNeedCount>;
using OutcomeStrengths = std::array<double, kPositivePairCount>;

/// Two-route learner. The direct route A maps a word straight to objects; the
/// prospective route maps a word to the feedback it predicts (E) and that
/// feedback to the object that produced it (O). Unknown words read as zero rows.
struct AssociativeState {
  AssociativeParams params;
  std::map<std::string, ObjectStrengths> direct;        // A[word][object]
  std::map<std::string, OutcomeStrengths> expectancy;   // E[word][pair]
  std::array<ObjectStrengths, kPositivePairCount> outcome{};  // O[pair][object]

  /// v(o) = A[w,o] + lambda * sum_f E[w,f] * O[f,o]
  ObjectStrengths evidence(const std::string& word) const;
};

ObjectKind caregiver_respond(const AssociativeState& state, const Word& word, Rng& rng);

/// r = +1 on positive feedback else -1; delta rule on A[word, chosen]; on
/// success E[word, f] and O[f, chosen] move toward 1; finally A *= retention.
AssociativeState caregiver_learn(AssociativeState state, const Word& word, ObjectKind chosen,
                                 const FeedbackSignal& feedback);

class SimulatedCaregiver {
 public:
  static SimulatedCaregiver oracle();
  static SimulatedCaregiver random();
  static SimulatedCaregiver associative(const AssociativeParams& params);

  CaregiverKind kind() const noexcept { return kind_; }

  // `expressed_need` is ground truth and only the Oracle reads it.
  ObjectKind respond(const Word& word, NeedKind expressed_need, Rng& rng) const;
  void learn(const Word& word, ObjectKind chosen, const FeedbackSignal& feedback);

  const AssociativeState* associative_state() const {
    return kind_ == CaregiverKind::Associative ? &state_ : nullptr;
  }

 private:
  explicit SimulatedCaregiver(CaregiverKind kind) : kind_(kind) {}

  CaregiverKind kind_;
  AssociativeState state_;
};

}  // namespace babble
