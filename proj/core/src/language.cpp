#include "babble/language.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "babble/errors.hpp"

namespace babble {
namespace {

bool is_lower_ascii(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= 'a' && c <= 'z'; });
}

constexpr std::array<std::string_view, 3> kInfantWords{"nana", "wada", "pada"};

}  // namespace

Word::Word(std::string first, std::string second)
    : syllables_{std::move(first), std::move(second)} {
  if (!is_lower_ascii(syllables_[0]) || !is_lower_ascii(syllables_[1])) {
    throw std::invalid_argument("syllables must be non-empty lowercase ASCII");
  }
  text_ = syllables_[0] + syllables_[1];
}

std::optional<std::size_t> Vocabulary::find(const std::string& text) const {
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (words[i].text() == text) return i;
  }
  return std::nullopt;
}

std::vector<std::string> default_syllables() { return {"na", "wa", "da", "pa", "ba", "ma"}; }

Vocabulary build_vocabulary(std::span<const std::string> syllable_set, std::size_t n_words,
                            std::uint64_t seed) {
  std::unordered_set<std::string> seen;
  for (const auto& s : syllable_set) {
    if (!is_lower_ascii(s)) throw std::invalid_argument("syllable '" + s + "' is not lowercase ASCII");
    if (!seen.insert(s).second) throw std::invalid_argument("duplicate syllable '" + s + "'");
  }
  const std::size_t capacity = syllable_set.size() * syllable_set.size();
  if (n_words > capacity) {
    throw Error(ErrorCode::CapacityExceeded, std::to_string(n_words) + " words requested but only " +
                                                 std::to_string(capacity) + " syllable pairs exist");
  }

  std::vector<Word> candidates;
  candidates.reserve(capacity);
  for (const auto& a : syllable_set) {
    for (const auto& b : syllable_set) candidates.emplace_back(a, b);
  }
  Rng rng = make_stream(seed, Stream::Vocabulary);
  std::shuffle(candidates.begin(), candidates.end(), rng);

  // Pull the infant words to the front in their canonical order.
  auto rank = [](const Word& w) -> std::size_t {
    for (std::size_t i = 0; i < kInfantWords.size(); ++i) {
      if (w.text() == kInfantWords[i]) return i;
    }
    return kInfantWords.size();
  };
  std::stable_sort(candidates.begin(), candidates.end(),
                   [&](const Word& a, const Word& b) { return rank(a) < rank(b); });

  candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(n_words), candidates.end());
  return Vocabulary{std::move(candidates),
                    std::vector<std::string>(syllable_set.begin(), syllable_set.end())};
}

void validate(const SelectionPolicy& policy) {
  if (const auto* eg = std::get_if<EpsilonGreedy>(&policy)) {
    if (!(eg->epsilon >= 0.0 && eg->epsilon <= 1.0))
      throw std::invalid_argument("epsilon must lie in [0, 1]");
  } else if (const auto* sm = std::get_if<Softmax>(&policy)) {
    if (!(sm->temperature > 0.0)) throw std::invalid_argument("temperature must be positive");
  }
}

double EpsilonSchedule::epsilon_at(std::size_t prior_expressions) const {
  if (span <= 1) return end;
  const double frac =
      static_cast<double>(std::min(prior_expressions, span - 1)) / static_cast<double>(span - 1);
  return start + (end - start) * frac;
}

WordNeedValues::WordNeedValues(Vocabulary vocabulary, double alpha)
    : vocabulary_(std::move(vocabulary)),
      alpha_(alpha),
      q_(kNeedCount * vocabulary_.size(), 0.0),
      counts_(kNeedCount * vocabulary_.size(), 0) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0, 1]");
}

WordNeedValues WordNeedValues::restore(Vocabulary vocabulary, double alpha, std::vector<double> q,
                                       std::vector<std::uint32_t> counts) {
  WordNeedValues values(std::move(vocabulary), alpha);
  if (q.size() != values.q_.size() || counts.size() != values.counts_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "value table shape does not match vocabulary");
  }
  values.q_ = std::move(q);
  values.counts_ = std::move(counts);
  return values;
}

std::span<const double> WordNeedValues::row(NeedKind need) const {
  return std::span<const double>(q_).subspan(index_of(need) * vocabulary_.size(),
                                             vocabulary_.size());
}

std::size_t choose_word_index(const WordNeedValues& values, NeedKind need,
                              const SelectionPolicy& policy, Rng& rng) {
  const std::size_t n = values.vocabulary().size();
  if (n == 0) throw Error(ErrorCode::EmptyVocabulary, "cannot choose from an empty vocabulary");
  const auto row = values.row(need);

  if (const auto* eg = std::get_if<EpsilonGreedy>(&policy)) {
    if (uniform01(rng) < eg->epsilon) return uniform_index(rng, n);
    const double best = *std::max_element(row.begin(), row.end());
    std::vector<std::size_t> tied;
    for (std::size_t i = 0; i < n; ++i) {
      if (row[i] == best) tied.push_back(i);
    }
    return tied.size() == 1 ? tied.front() : tied[uniform_index(rng, tied.size())];
  }

  const double temperature = std::get<Softmax>(policy).temperature;
  const double best = *std::max_element(row.begin(), row.end());
  std::vector<double> weights(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    weights[i] = std::exp((row[i] - best) / temperature);
    total += weights[i];
  }
  double u = uniform01(rng) * total;
  for (std::size_t i = 0; i < n; ++i) {
    if (u < weights[i]) return i;
    u -= weights[i];
  }
  // Rounding residue lands on the last positive weight.
  for (std::size_t i = n; i-- > 0;) {
    if (weights[i] > 0.0) return i;
  }
  return n - 1;
}

Word choose_word(const WordNeedValues& values, NeedKind need, const SelectionPolicy& policy,
                 Rng& rng) {
  return values.vocabulary().words[choose_word_index(values, need, policy, rng)];
}

WordNeedValues update_value(WordNeedValues values, NeedKind need, const Word& word, int reward) {
  if (reward != 1 && reward != -1) throw std::invalid_argument("reward must be +1 or -1");
  const auto w = values.vocabulary_.find(word.text());
  if (!w) {
    throw Error(ErrorCode::UnknownPair, std::string(to_string(need)) + "/" + word.text());
  }
  const auto s = values.slot(need, *w);
  values.q_[s] += values.alpha_ * (static_cast<double>(reward) - values.q_[s]);
  ++values.counts_[s];
  return values;
}

}  // namespace babble
