#include "babble/session.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "babble/errors.hpp"
#include "babble/metrics.hpp"

namespace babble {
namespace {

constexpr std::size_t kMaxDecaySubsteps = 1000;

[[noreturn]] void invalid(const std::string& field, const std::string& why) {
  throw Error(ErrorCode::ConfigInvalid, field + ": " + why);
}

void check_per_need(const PerNeed<double>& values, const char* field, double lo, double hi) {
  for (NeedKind need : kAllNeeds) {
    const double v = values[index_of(need)];
    if (!(v >= lo && v <= hi)) {
      invalid(std::string(field) + "." + std::string(to_string(need)),
              "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
  }
}

SelectionPolicy policy_for(const PolicyConfig& policy, std::size_t prior_expressions) {
  if (policy.kind == PolicyConfig::Kind::Softmax) return Softmax{policy.temperature};
  return EpsilonGreedy{policy.epsilon.epsilon_at(prior_expressions)};
}

HomeostaticState initial_homeostasis(const SessionConfig& c) {
  HomeostaticState s;
  s.level = c.initial_level;
  s.optimal = c.optimal;
  s.decay_rate = c.decay_rate;
  s.satiation_gain = c.satiation_gain;
  return s;
}

std::optional<SimulatedCaregiver> make_caregiver(const std::optional<CaregiverConfig>& c) {
  if (!c) return std::nullopt;
  switch (c->kind) {
    case CaregiverKind::Oracle: return SimulatedCaregiver::oracle();
    case CaregiverKind::Random: return SimulatedCaregiver::random();
    case CaregiverKind::Associative: return SimulatedCaregiver::associative(c->associative);
  }
  return std::nullopt;
}

ObjectRecognizer make_recognizer(const SessionConfig& c) {
  Rng init = make_stream(c.seed, Stream::Perception);
  return ObjectRecognizer(make_som(c.perception.som_config(), init),
                          NeedPerceptron::zeros(c.perception.feature_dim,
                                                c.perception.perceptron_epsilon));
}

FeedbackMap make_feedback_map(const SessionConfig& c, Rng& rng) {
  if (c.condition == FeedbackCondition::DOT) return dot_feedback_map();
  return nondot_feedback_map(c.nondot_fixed_shuffle, rng);
}

const SessionConfig& validated(const SessionConfig& c) {
  validate(c);
  return c;
}

}  // namespace

SomConfig PerceptionConfig::som_config() const {
  SomConfig som;
  som.rows = som_rows;
  som.cols = som_cols;
  som.dim = feature_dim;
  som.learning_rate_start = som_learning_rate_start;
  som.learning_rate_end = som_learning_rate_end;
  som.radius_start = std::max(1.0, static_cast<double>(std::max(som_rows, som_cols)) / 2.0);
  som.radius_end = som_radius_end;
  som.decay_steps = som_decay_steps;
  return som;
}

void validate(const SessionConfig& c) {
  if (!(c.theta > 0.0 && c.theta < 2.0)) invalid("theta", "must lie in (0, 2)");
  check_per_need(c.initial_level, "initial_level", 0.0, 1.0);
  check_per_need(c.optimal, "optimal", 0.0, 1.0);
  check_per_need(c.decay_rate, "decay_rate", 0.0, 1.0);
  check_per_need(c.satiation_gain, "satiation_gain", 0.0, std::numeric_limits<double>::max());
  if (std::all_of(c.decay_rate.begin(), c.decay_rate.end(), [](double d) { return d == 0.0; }))
    invalid("decay_rate", "at least one need must decay");
  if (c.vocabulary_size < 1) invalid("vocabulary_size", "must be at least 1");
  if (c.vocabulary_size > c.syllables.size() * c.syllables.size())
    invalid("vocabulary_size", "exceeds the number of syllable pairs");
  if (!(c.alpha > 0.0 && c.alpha <= 1.0)) invalid("alpha", "must lie in (0, 1]");

  const auto& e = c.policy.epsilon;
  if (!(e.start >= 0.0 && e.start <= 1.0)) invalid("policy.epsilon_start", "must lie in [0, 1]");
  if (!(e.end >= 0.0 && e.end <= 1.0)) invalid("policy.epsilon_end", "must lie in [0, 1]");
  if (!(c.policy.temperature > 0.0)) invalid("policy.temperature", "must be positive");

  if (c.caregiver && c.caregiver->kind == CaregiverKind::Associative) {
    try {
      babble::validate(c.caregiver->associative);
    } catch (const std::invalid_argument& ex) {
      invalid("caregiver", ex.what());
    }
  }

  if (c.min_iterations < 1) invalid("min_iterations", "must be at least 1");
  if (c.min_iterations > c.max_iterations) invalid("min_iterations", "must not exceed max_iterations");
  if (c.mar_window < 1) invalid("mar_window", "must be at least 1");
  if (!(c.convergence_mar_threshold >= -1.0 && c.convergence_mar_threshold <= 1.0))
    invalid("convergence_mar_threshold", "must lie in [-1, 1]");

  const auto& p = c.perception;
  if (p.feature_dim < kNeedCount) invalid("perception.feature_dim", "must be at least 3");
  if (!(p.noise_sigma >= 0.0)) invalid("perception.noise_sigma", "must be non-negative");
  if (p.som_rows < 1 || p.som_cols < 1) invalid("perception.som_rows", "grid must be non-empty");
  if (!(p.som_learning_rate_start >= 0.0 && p.som_learning_rate_start <= 1.0))
    invalid("perception.som_learning_rate_start", "must lie in [0, 1]");
  if (!(p.som_learning_rate_end >= 0.0 && p.som_learning_rate_end <= 1.0))
    invalid("perception.som_learning_rate_end", "must lie in [0, 1]");
  if (!(p.som_radius_end > 0.0)) invalid("perception.som_radius_end", "must be positive");
  if (!(p.perceptron_epsilon > 0.0 && p.perceptron_epsilon <= 1.0))
    invalid("perception.perceptron_epsilon", "must lie in (0, 1]");
}

void validate(const SamRating& r) {
  auto check = [](int v, const std::string& name) {
    if (v < 1 || v > 5) {
      throw Error(ErrorCode::RangeViolation, name + "=" + std::to_string(v) + " outside 1..5");
    }
  };
  check(r.valence, "valence");
  check(r.arousal, "arousal");
  check(r.dominance, "dominance");
  for (const auto& [id, v] : r.likert_answers) check(v, "likert." + id);
}

std::vector<int> EpisodeLog::rewards() const {
  std::vector<int> out;
  out.reserve(trials.size());
  for (const auto& t : trials) out.push_back(t.reward);
  return out;
}

std::string_view to_string(SessionPhase phase) {
  switch (phase) {
    case SessionPhase::Idle: return "idle";
    case SessionPhase::NeedArises: return "need_arises";
    case SessionPhase::Babbled: return "babbled";
    case SessionPhase::AwaitingObject: return "awaiting_object";
    case SessionPhase::Evaluated: return "evaluated";
    case SessionPhase::FeedbackEmitted: return "feedback_emitted";
    case SessionPhase::Updated: return "updated";
    case SessionPhase::Terminated: return "terminated";
  }
  return "?";
}

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::Phase: return "phase";
    case EventKind::Babble: return "babble";
    case EventKind::Evaluate: return "evaluate";
    case EventKind::Feedback: return "feedback";
    case EventKind::Progress: return "progress";
    case EventKind::Termination: return "termination";
  }
  return "?";
}

bool termination_check(std::span<const TrialRecord> trials, const SessionConfig& config) {
  const std::size_t n = trials.size();
  if (n == 0) return false;
  if (n >= config.max_iterations) return true;
  return n >= config.min_iterations && trials.back().mar >= config.convergence_mar_threshold;
}

Session::Session(SessionConfig config)
    : config_(validated(config)),
      policy_rng_(make_stream(config_.seed, Stream::Policy)),
      feedback_rng_(make_stream(config_.seed, Stream::Feedback)),
      caregiver_rng_(make_stream(config_.seed, Stream::Caregiver)),
      noise_rng_(make_stream(config_.seed, Stream::Noise)),
      ties_rng_(make_stream(config_.seed, Stream::Ties)),
      homeostasis_(initial_homeostasis(config_)),
      theta_(config_.theta),
      values_(build_vocabulary(config_.syllables, config_.vocabulary_size, config_.seed),
              config_.alpha),
      feedback_map_(make_feedback_map(config_, feedback_rng_)),
      recognizer_(make_recognizer(config_)),
      caregiver_(make_caregiver(config_.caregiver)) {}

SessionEvent Session::make_event(EventKind kind) {
  SessionEvent e;
  e.index = next_event_++;
  e.kind = kind;
  e.phase = phase_;
  return e;
}

std::vector<SessionEvent> Session::advance(std::optional<ObjectKind> input) {
  if (phase_ == SessionPhase::Terminated) {
    throw Error(ErrorCode::SessionTerminated, "session already terminated");
  }
  if (phase_ == SessionPhase::AwaitingObject) {
    if (!input) throw Error(ErrorCode::UnexpectedInput, "an object is required while awaiting one");
  } else if (input) {
    throw Error(ErrorCode::UnexpectedInput,
                "object offered during phase " + std::string(to_string(phase_)));
  }

  std::vector<SessionEvent> out;
  switch (phase_) {
    case SessionPhase::Idle: out = arise_need(); break;
    case SessionPhase::NeedArises: out = babble(); break;
    case SessionPhase::Babbled:
      phase_ = SessionPhase::AwaitingObject;
      out.push_back(make_event(EventKind::Phase));
      break;
    case SessionPhase::AwaitingObject: out = evaluate(*input); break;
    case SessionPhase::Evaluated: out = emit_feedback(); break;
    case SessionPhase::FeedbackEmitted: out = update(); break;
    case SessionPhase::Updated:
      out = termination_check(trials_, config_) ? finish() : arise_need();
      break;
    case SessionPhase::Terminated: break;
  }
  events_.insert(events_.end(), out.begin(), out.end());
  return out;
}

std::vector<SessionEvent> Session::arise_need() {
  visible_.clear();
  for (ObjectKind o : kAllObjects) {
    visible_.push_back(synth_features(o, config_.perception.noise_sigma, noise_rng_,
                                      config_.perception.feature_dim));
  }
  const PerNeed<double> s = stimulus_intensities(recognizer_.perceptron(), visible_);

  HomeostaticState state = homeostasis_;
  std::optional<NeedKind> chosen;
  for (std::size_t step = 0; step < kMaxDecaySubsteps && !chosen; ++step) {
    state = decay_step(std::move(state));
    std::array<Motivation, kNeedCount> motivations{};
    for (NeedKind need : kAllNeeds) {
      motivations[index_of(need)] =
          compute_motivation(compute_drive(state, need), {need, s[index_of(need)]});
    }
    chosen = select_expressed_need(motivations, theta_, ties_rng_);
  }
  if (!chosen) {
    throw Error(ErrorCode::DegenerateConfig, "no need crossed the expression threshold after " +
                                                 std::to_string(kMaxDecaySubsteps) + " decay steps");
  }

  homeostasis_ = state;
  need_ = chosen;
  word_.reset();
  offered_.reset();
  recognized_.reset();
  pending_latency_.reset();

  phase_ = SessionPhase::NeedArises;
  SessionEvent e = make_event(EventKind::Phase);
  e.need = need_;
  e.levels = homeostasis_.level;
  return {e};
}

std::vector<SessionEvent> Session::babble() {
  const std::size_t k = index_of(*need_);
  const SelectionPolicy policy = policy_for(config_.policy, expressions_[k]);
  word_ = choose_word(values_, *need_, policy, policy_rng_);
  ++expressions_[k];

  phase_ = SessionPhase::Babbled;
  std::vector<SessionEvent> out{make_event(EventKind::Phase), make_event(EventKind::Babble)};
  out.back().word = word_->text();
  return out;
}

std::vector<SessionEvent> Session::evaluate(ObjectKind offered) {
  offered_ = offered;
  ObjectKind judged = offered;
  if (config_.perception.in_loop) {
    try {
      judged = recognizer_.recognize(visible_[index_of(offered)]).object;
      recognized_ = judged;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::UnlabeledCluster) throw;
      recognized_ = offered;  // untrained map: fall back to the true identity
    }
  }
  reward_ = satisfies(judged) == *need_ ? 1 : -1;

  phase_ = SessionPhase::Evaluated;
  std::vector<SessionEvent> out{make_event(EventKind::Phase), make_event(EventKind::Evaluate)};
  out.back().object = offered;
  out.back().reward = reward_;
  out.back().need = need_;
  return out;
}

std::vector<SessionEvent> Session::emit_feedback() {
  feedback_ = reward_ > 0 ? positive_feedback(feedback_map_, *need_, feedback_rng_)
                          : negative_feedback();
  phase_ = SessionPhase::FeedbackEmitted;
  std::vector<SessionEvent> out{make_event(EventKind::Phase), make_event(EventKind::Feedback)};
  out.back().feedback = feedback_;
  return out;
}

std::vector<SessionEvent> Session::update() {
  values_ = update_value(std::move(values_), *need_, *word_, reward_);
  if (reward_ > 0) homeostasis_ = satisfy(homeostasis_, *need_);
  recognizer_.train(visible_[index_of(*offered_)], *offered_);
  if (caregiver_) caregiver_->learn(*word_, *offered_, feedback_);

  rewards_.push_back(reward_);
  TrialRecord t;
  t.n = rewards_.size();
  t.expressed_need = *need_;
  t.word = word_->text();
  t.offered_object = *offered_;
  t.recognized_object = recognized_;
  t.reward = reward_;
  t.feedback = feedback_;
  t.mar = moving_average_reward(rewards_, config_.mar_window, t.n);
  t.homeostatic_snapshot = homeostasis_.level;
  t.latency_ms = pending_latency_;
  trials_.push_back(std::move(t));

  phase_ = SessionPhase::Updated;
  std::vector<SessionEvent> out{make_event(EventKind::Phase), make_event(EventKind::Progress)};
  out.back().n = trials_.size();
  out.back().max = config_.max_iterations;
  return out;
}

bool Session::converged() const {
  return !trials_.empty() && trials_.size() >= config_.min_iterations &&
         trials_.back().mar >= config_.convergence_mar_threshold;
}

std::vector<SessionEvent> Session::finish() {
  phase_ = SessionPhase::Terminated;
  std::vector<SessionEvent> out{make_event(EventKind::Phase), make_event(EventKind::Termination)};
  out.back().converged = converged();
  out.back().n = trials_.size();
  out.back().max = config_.max_iterations;
  return out;
}

void Session::set_pending_latency(double ms) {
  if (phase_ != SessionPhase::AwaitingObject) {
    throw Error(ErrorCode::UnexpectedInput, "latency applies only while awaiting an object");
  }
  pending_latency_ = ms;
}

ObjectKind Session::simulated_response() {
  if (!caregiver_) throw Error(ErrorCode::ConfigInvalid, "session has no simulated caregiver");
  if (phase_ != SessionPhase::AwaitingObject) {
    throw Error(ErrorCode::UnexpectedInput, "caregiver asked to respond outside AwaitingObject");
  }
  return caregiver_->respond(*word_, *need_, caregiver_rng_);
}

EpisodeLog Session::log() const {
  EpisodeLog log{.config = config_,
                 .trials = trials_,
                 .converged = phase_ == SessionPhase::Terminated && converged(),
                 .convergence_time = std::nullopt,
                 .final_q = values_,
                 .som = recognizer_.grid(),
                 .perceptron = recognizer_.perceptron(),
                 .caregiver_state = std::nullopt,
                 .survey = std::nullopt};
  if (!rewards_.empty()) {
    log.convergence_time =
        convergence_time(rewards_, config_.mar_window, config_.convergence_mar_threshold);
  }
  if (caregiver_) {
    if (const auto* s = caregiver_->associative_state()) log.caregiver_state = *s;
  }
  return log;
}

EpisodeLog run_episode(const SessionConfig& config) {
  validate(config);
  if (!config.caregiver) {
    throw Error(ErrorCode::ConfigInvalid, "caregiver: run_episode needs a simulated caregiver");
  }
  Session session(config);
  while (session.phase() != SessionPhase::Terminated) {
    if (session.phase() == SessionPhase::AwaitingObject) {
      session.advance(session.simulated_response());
    } else {
      session.advance();
    }
  }
  return session.log();
}

}  // namespace babble
