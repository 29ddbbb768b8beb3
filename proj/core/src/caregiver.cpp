#include "babble/caregiver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace babble {
namespace {

bool in_unit_interval(double x) { return x > 0.0 && x <= 1.0; }

}  // namespace

std::string_view to_string(CaregiverKind kind) {
  switch (kind) {
    case CaregiverKind::Oracle: return "oracle";
    case CaregiverKind::Random: return "random";
    case CaregiverKind::Associative: return "associative";
  }
  return "?";
}

std::optional<CaregiverKind> parse_caregiver_kind(std::string_view text) {
  for (auto k : {CaregiverKind::Oracle, CaregiverKind::Random, CaregiverKind::Associative}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

void validate(const AssociativeParams& p) {
  if (!in_unit_interval(p.alpha_a) || !in_unit_interval(p.alpha_e) || !in_unit_interval(p.alpha_o))
    throw std::invalid_argument("caregiver learning rates must lie in (0, 1]");
  if (!(p.lambda >= 0.0)) throw std::invalid_argument("lambda must be non-negative");
  if (!(p.tau > 0.0)) throw std::invalid_argument("tau must be positive");
  if (!in_unit_interval(p.retention)) throw std::invalid_argument("retention must lie in (0, 1]");
}

ObjectStrengths AssociativeState::evidence(const std::string& word) const {
  ObjectStrengths v{};
  if (auto it = direct.find(word); it != direct.end()) v = it->second;
  if (auto it = expectancy.find(word); it != expectancy.end()) {
    for (std::size_t f = 0; f < kPositivePairCount; ++f) {
      for (std::size_t o = 0; o < kNeedCount; ++o) {
        v[o] += params.lambda * it->second[f] * outcome[f][o];
      }
    }
  }
  return v;
}

ObjectKind caregiver_respond(const AssociativeState& state, const Word& word, Rng& rng) {
  const ObjectStrengths v = state.evidence(word.text());
  const double best = *std::max_element(v.begin(), v.end());
  ObjectStrengths weight{};
  double total = 0.0;
  for (std::size_t o = 0; o < kNeedCount; ++o) {
    weight[o] = std::exp((v[o] - best) / state.params.tau);
    total += weight[o];
  }
  double u = uniform01(rng) * total;
  for (std::size_t o = 0; o < kNeedCount; ++o) {
    if (u < weight[o]) return kAllObjects[o];
    u -= weight[o];
  }
  return kAllObjects[static_cast<std::size_t>(
      std::distance(weight.begin(), std::max_element(weight.begin(), weight.end())))];
}

AssociativeState caregiver_learn(AssociativeState state, const Word& word, ObjectKind chosen,
                                 const FeedbackSignal& feedback) {
  const auto& p = state.params;
  const std::size_t o = index_of(chosen);
  const double r = feedback.valence == Valence::Positive ? 1.0 : -1.0;

  double& a = state.direct[word.text()][o];
  a += p.alpha_a * (r - a);

  if (auto f = positive_pair_index(feedback)) {
    double& e = state.expectancy[word.text()][*f];
    e += p.alpha_e * (1.0 - e);
    double& out = state.outcome[*f][o];
    out += p.alpha_o * (1.0 - out);
  }

  for (auto& [_, row] : state.direct) {
    for (double& x : row) x *= p.retention;
  }
  return state;
}

SimulatedCaregiver SimulatedCaregiver::oracle() { return SimulatedCaregiver(CaregiverKind::Oracle); }

SimulatedCaregiver SimulatedCaregiver::random() { return SimulatedCaregiver(CaregiverKind::Random); }

SimulatedCaregiver SimulatedCaregiver::associative(const AssociativeParams& params) {
  validate(params);
  SimulatedCaregiver c(CaregiverKind::Associative);
  c.state_.params = params;
  return c;
}

ObjectKind SimulatedCaregiver::respond(const Word& word, NeedKind expressed_need, Rng& rng) const {
  switch (kind_) {
    case CaregiverKind::Oracle: return object_for(expressed_need);
    case CaregiverKind::Random: return kAllObjects[uniform_index(rng, kNeedCount)];
    case CaregiverKind::Associative: return caregiver_respond(state_, word, rng);
  }
  return ObjectKind::Cookie;
}

void SimulatedCaregiver::learn(const Word& word, ObjectKind chosen, const FeedbackSignal& feedback) {
  if (kind_ == CaregiverKind::Associative) {
    state_ = caregiver_learn(std::move(state_), word, chosen, feedback);
  }
}

}  // namespace babble
