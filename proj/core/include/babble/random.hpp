#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace babble {

using Rng = std::mt19937_64;

// Named substreams derived from one master seed. Each component draws only
// from its own stream so a change in one component's draw count cannot shift
// another component's sequence.
enum class Stream : std::uint64_t {
  Policy = 1,
  Feedback = 2,
  Caregiver = 3,
  Noise = 4,
  Ties = 5,
  Vocabulary = 6,
  Perception = 7,
  Bootstrap = 8,
  Service = 9,
};

Rng make_stream(std::uint64_t seed, Stream stream);

// Uniform integer in [0, n). n must be positive.
std::size_t uniform_index(Rng& rng, std::size_t n);

// Uniform real in [0, 1).
double uniform01(Rng& rng);

}  // namespace babble
