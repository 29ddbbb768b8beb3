#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "babble/caregiver.hpp"
#include "babble/feedback.hpp"
#include "babble/homeostasis.hpp"
#include "babble/language.hpp"
#include "babble/needs.hpp"
#include "babble/perception.hpp"
#include "babble/random.hpp"

namespace babble {

struct PolicyConfig {
  enum class Kind : std::uint8_t { EpsilonGreedy, Softmax };
  Kind kind = Kind::EpsilonGreedy;
  EpsilonSchedule epsilon{};
  double temperature = 0.1;
};

struct CaregiverConfig {
  CaregiverKind kind = CaregiverKind::Associative;
  AssociativeParams associative{};
};

struct PerceptionConfig {
  std::size_t feature_dim = kDefaultFeatureDim;
  double noise_sigma = 0.05;
  std::size_t som_rows = 4;
  std::size_t som_cols = 4;
  double som_learning_rate_start = 0.5;
  double som_learning_rate_end = 0.01;
  double som_radius_end = 1.0;
  std::size_t som_decay_steps = 160;
  double perceptron_epsilon = 0.1;
  // When set, the recognized object (not the true one) decides the reward.
  bool in_loop = false;

  SomConfig som_config() const;
};

struct SessionConfig {
  FeedbackCondition condition = FeedbackCondition::DOT;
  std::uint64_t seed = 0;

  double theta = 0.6;
  PerNeed<double> initial_level{1.0, 1.0, 1.0};
  PerNeed<double> optimal{1.0, 1.0, 1.0};
  PerNeed<double> decay_rate{0.1, 0.1, 0.1};
  PerNeed<double> satiation_gain{1.0, 1.0, 1.0};

  std::vector<std::string> syllables = default_syllables();
  std::size_t vocabulary_size = 6;
  double alpha = 0.5;
  PolicyConfig policy{};

  // Absent for live sessions driven by a human.
  std::optional<CaregiverConfig> caregiver = CaregiverConfig{};

  std::size_t min_iterations = 12;
  std::size_t max_iterations = 16;
  double convergence_mar_threshold = 0.8;
  std::size_t mar_window = 5;

  PerceptionConfig perception{};
  bool nondot_fixed_shuffle = false;
};

/// Throws Error(ConfigInvalid) naming the offending field.
void validate(const SessionConfig& config);

struct TrialRecord {
  std::size_t n = 0;  // 1-based
  NeedKind expressed_need = NeedKind::Hunger;
  std::string word;
  ObjectKind offered_object = ObjectKind::Cookie;
  std::optional<ObjectKind> recognized_object;  // only with perception in the loop
  int reward = 0;
  FeedbackSignal feedback{};
  double mar = 0.0;
  PerNeed<double> homeostatic_snapshot{};
  std::optional<double> latency_ms;
};

struct SamRating {
  int valence = 0;
  int arousal = 0;
  int dominance = 0;
  std::vector<std::pair<std::string, int>> likert_answers;

  friend bool operator==(const SamRating&, const SamRating&) = default;
};

/// Throws Error(RangeViolation) when any rating falls outside 1..5.
void validate(const SamRating& rating);

struct EpisodeLog {
  SessionConfig config;
  std::vector<TrialRecord> trials;
  bool converged = false;
  std::optional<std::size_t> convergence_time;
  WordNeedValues final_q;
  SomGrid som;
  NeedPerceptron perceptron;
  std::optional<AssociativeState> caregiver_state;
  std::optional<SamRating> survey;

  std::vector<int> rewards() const;
};

enum class SessionPhase : std::uint8_t {
  Idle,
  NeedArises,
  Babbled,
  AwaitingObject,
  Evaluated,
  FeedbackEmitted,
  Updated,
  Terminated,
};

std::string_view to_string(SessionPhase phase);

enum class EventKind : std::uint8_t { Phase, Babble, Evaluate, Feedback, Progress, Termination };

std::string_view to_string(EventKind kind);

/// One observable step of a session. Fields not relevant to `kind` stay empty.
/// `need`, `reward` and `levels` are internal and never shown to a caregiver.
struct SessionEvent {
  std::size_t index = 0;  // 1-based, per session
  EventKind kind = EventKind::Phase;
  SessionPhase phase = SessionPhase::Idle;
  std::optional<NeedKind> need;
  std::optional<PerNeed<double>> levels;
  std::optional<std::string> word;
  std::optional<ObjectKind> object;
  std::optional<int> reward;
  std::optional<FeedbackSignal> feedback;
  std::size_t n = 0;
  std::size_t max = 0;
  bool converged = false;
};

/// True iff (n >= min_iterations and MAR_n >= threshold) or n >= max_iterations.
bool termination_check(std::span<const TrialRecord> trials, const SessionConfig& config);

/// The interaction loop as an explicit phase machine:
/// Idle -> NeedArises -> Babbled -> AwaitingObject -> Evaluated ->
/// FeedbackEmitted -> Updated -> (NeedArises | Terminated).
class Session {
 public:
  explicit Session(SessionConfig config);

  /// Performs one phase transition. An object is required in AwaitingObject
  /// and rejected everywhere else (UnexpectedInput, state unchanged).
  std::vector<SessionEvent> advance(std::optional<ObjectKind> input = std::nullopt);

  /// Latency recorded on the trial currently awaiting an object.
  void set_pending_latency(double ms);

  /// The configured simulated caregiver's choice for the current babble.
  ObjectKind simulated_response();
  bool has_simulated_caregiver() const noexcept { return caregiver_.has_value(); }

  SessionPhase phase() const noexcept { return phase_; }
  const SessionConfig& config() const noexcept { return config_; }
  const std::vector<TrialRecord>& trials() const noexcept { return trials_; }
  const std::vector<SessionEvent>& events() const noexcept { return events_; }
  std::optional<NeedKind> expressed_need() const noexcept { return need_; }
  const std::optional<Word>& current_word() const noexcept { return word_; }
  const HomeostaticState& homeostasis() const noexcept { return homeostasis_; }
  const WordNeedValues& values() const noexcept { return values_; }
  const ObjectRecognizer& recognizer() const noexcept { return recognizer_; }

  EpisodeLog log() const;

 private:
  std::vector<SessionEvent> arise_need();
  std::vector<SessionEvent> babble();
  std::vector<SessionEvent> evaluate(ObjectKind offered);
  std::vector<SessionEvent> emit_feedback();
  std::vector<SessionEvent> update();
  std::vector<SessionEvent> finish();
  SessionEvent make_event(EventKind kind);
  bool converged() const;

  SessionConfig config_;
  SessionPhase phase_ = SessionPhase::Idle;
  std::size_t next_event_ = 1;
  std::vector<SessionEvent> events_;

  Rng policy_rng_;
  Rng feedback_rng_;
  Rng caregiver_rng_;
  Rng noise_rng_;
  Rng ties_rng_;

  HomeostaticState homeostasis_;
  ExpressionThreshold theta_;
  WordNeedValues values_;
  PerNeed<std::size_t> expressions_{0, 0, 0};
  FeedbackMap feedback_map_;
  ObjectRecognizer recognizer_;
  std::optional<SimulatedCaregiver> caregiver_;

  // Per-trial scratch.
  std::vector<FeatureVector> visible_;
  std::optional<NeedKind> need_;
  std::optional<Word> word_;
  std::optional<ObjectKind> offered_;
  std::optional<ObjectKind> recognized_;
  int reward_ = 0;
  FeedbackSignal feedback_{};
  std::optional<double> pending_latency_;

  std::vector<TrialRecord> trials_;
  std::vector<int> rewards_;
};

/// Runs a simulated-caregiver session to completion. Deterministic in the
/// config; throws Error(ConfigInvalid) when no caregiver is configured.
EpisodeLog run_episode(const SessionConfig& config);

}  // namespace babble
