#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "babble/random.hpp"

namespace babble {

/// Moving average of rewards at 1-based iteration n with window m:
/// the mean of all rewards so far while n < m, else the mean of the last m.
double moving_average_reward(std::span<const int> rewards, std::size_t m, std::size_t n);

/// MAR_1 .. MAR_len.
std::vector<double> mar_curve(std::span<const int> rewards, std::size_t m);

/// Smallest n with MAR_n >= threshold.
std::optional<std::size_t> convergence_time(std::span<const int> rewards, std::size_t m,
                                            double mar_threshold);

struct CurveAggregate {
  double mean = 0.0;
  double sd = 0.0;  // population standard deviation
  std::size_t count = 0;
};

/// Per-iteration mean/sd of MAR over the runs that lasted at least that long.
std::vector<CurveAggregate> aggregate_runs(std::span<const std::vector<int>> series, std::size_t m);

struct Interval {
  double estimate = 0.0;
  double low = 0.0;
  double high = 0.0;

  bool contains(double x) const { return low <= x && x <= high; }
};

/// Percentile bootstrap of the mean of paired differences.
Interval paired_bootstrap_ci(std::span<const double> differences, std::size_t resamples,
                             double level, Rng& rng);

/// Plug-in mutual information (bits) between two discrete variables given
/// observed (x, y) pairs with x < nx and y < ny.
double empirical_mutual_information(std::span<const std::pair<std::size_t, std::size_t>> samples,
                                    std::size_t nx, std::size_t ny);

}  // namespace babble
