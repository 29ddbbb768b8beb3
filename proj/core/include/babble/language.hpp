#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "babble/needs.hpp"
#include "babble/random.hpp"

namespace babble {

/// A two-syllable babble word, e.g. "na" + "na" -> "nana".
class Word {
 public:
  Word(std::string first, std::string second);

  const std::array<std::string, 2>& syllables() const noexcept { return syllables_; }
  const std::string& text() const noexcept { return text_; }

  friend bool operator==(const Word& a, const Word& b) { return a.text_ == b.text_; }

 private:
  std::array<std::string, 2> syllables_;
  std::string text_;
};

struct Vocabulary {
  std::vector<Word> words;
  std::vector<std::string> syllable_set;

  std::optional<std::size_t> find(const std::string& text) const;
  std::size_t size() const noexcept { return words.size(); }
};

/// {na, wa, da, pa, ba, ma}
std::vector<std::string> default_syllables();

/// Samples `n_words` distinct syllable pairs. The infant words "nana", "wada"
/// and "pada" are placed first whenever their syllables are available; the
/// remaining order is a seeded shuffle of all pairs.
Vocabulary build_vocabulary(std::span<const std::string> syllable_set, std::size_t n_words,
                            std::uint64_t seed);

struct EpsilonGreedy {
  double epsilon = 0.1;
};
struct Softmax {
  double temperature = 0.1;
};
using SelectionPolicy = std::variant<EpsilonGreedy, Softmax>;

void validate(const SelectionPolicy& policy);

/// Linear epsilon decay over the first `span` expressions of a need.
struct EpsilonSchedule {
  double start = 1.0;
  double end = 0.1;
  std::size_t span = 6;

  double epsilon_at(std::size_t prior_expressions) const;
};

/// Bandit value table q(need, word) with a constant step size.
class WordNeedValues {
 public:
  WordNeedValues(Vocabulary vocabulary, double alpha);

  // Rebuilds a table from serialized values; shapes must agree.
  static WordNeedValues restore(Vocabulary vocabulary, double alpha, std::vector<double> q,
                                std::vector<std::uint32_t> counts);

  const Vocabulary& vocabulary() const noexcept { return vocabulary_; }
  double alpha() const noexcept { return alpha_; }

  double q(NeedKind need, std::size_t word) const { return q_[slot(need, word)]; }
  std::uint32_t count(NeedKind need, std::size_t word) const { return counts_[slot(need, word)]; }
  std::span<const double> row(NeedKind need) const;

  // Row-major [need][word] storage.
  const std::vector<double>& table() const noexcept { return q_; }
  const std::vector<std::uint32_t>& counts() const noexcept { return counts_; }

  friend WordNeedValues update_value(WordNeedValues values, NeedKind need, const Word& word,
                                     int reward);

 private:
  std::size_t slot(NeedKind need, std::size_t word) const {
    return index_of(need) * vocabulary_.size() + word;
  }

  Vocabulary vocabulary_;
  double alpha_;
  std::vector<double> q_;
  std::vector<std::uint32_t> counts_;
};

std::size_t choose_word_index(const WordNeedValues& values, NeedKind need,
                              const SelectionPolicy& policy, Rng& rng);

Word choose_word(const WordNeedValues& values, NeedKind need, const SelectionPolicy& policy,
                 Rng& rng);

// q' = q + alpha * (reward - q) on exactly one entry. reward must be +1 or -1.
WordNeedValues update_value(WordNeedValues values, NeedKind need, const Word& word, int reward);

}  // namespace babble
