#include "babble/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "babble/errors.hpp"

namespace babble {

double moving_average_reward(std::span<const int> rewards, std::size_t m, std::size_t n) {
  if (m == 0) throw std::invalid_argument("MAR window must be at least 1");
  if (n < 1 || n > rewards.size()) {
    throw Error(ErrorCode::IndexOutOfRange, "iteration " + std::to_string(n) + " outside [1, " +
                                                std::to_string(rewards.size()) + "]");
  }
  const std::size_t width = n < m ? n : m;
  long sum = 0;
  for (std::size_t i = n - width; i < n; ++i) sum += rewards[i];
  return static_cast<double>(sum) / static_cast<double>(width);
}

std::vector<double> mar_curve(std::span<const int> rewards, std::size_t m) {
  std::vector<double> out;
  out.reserve(rewards.size());
  for (std::size_t n = 1; n <= rewards.size(); ++n) out.push_back(moving_average_reward(rewards, m, n));
  return out;
}

std::optional<std::size_t> convergence_time(std::span<const int> rewards, std::size_t m,
                                            double mar_threshold) {
  for (std::size_t n = 1; n <= rewards.size(); ++n) {
    if (moving_average_reward(rewards, m, n) >= mar_threshold) return n;
  }
  return std::nullopt;
}

std::vector<CurveAggregate> aggregate_runs(std::span<const std::vector<int>> series, std::size_t m) {
  if (series.empty()) throw Error(ErrorCode::EmptyInput, "no reward series to aggregate");
  std::size_t longest = 0;
  std::vector<std::vector<double>> curves;
  curves.reserve(series.size());
  for (const auto& s : series) {
    if (s.empty()) throw Error(ErrorCode::EmptyInput, "reward series must be non-empty");
    curves.push_back(mar_curve(s, m));
    longest = std::max(longest, s.size());
  }

  std::vector<CurveAggregate> out(longest);
  for (std::size_t k = 0; k < longest; ++k) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& c : curves) {
      if (c.size() > k) {
        sum += c[k];
        ++count;
      }
    }
    const double mean = sum / static_cast<double>(count);
    double ss = 0.0;
    for (const auto& c : curves) {
      if (c.size() > k) ss += (c[k] - mean) * (c[k] - mean);
    }
    out[k] = {mean, std::sqrt(ss / static_cast<double>(count)), count};
  }
  return out;
}

Interval paired_bootstrap_ci(std::span<const double> differences, std::size_t resamples,
                             double level, Rng& rng) {
  if (differences.empty()) throw Error(ErrorCode::EmptyInput, "no paired differences");
  if (resamples == 0) throw std::invalid_argument("bootstrap needs at least one resample");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("confidence level must lie in (0, 1)");

  const std::size_t n = differences.size();
  double total = 0.0;
  for (double d : differences) total += d;

  std::vector<double> means(resamples);
  for (auto& mean : means) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += differences[uniform_index(rng, n)];
    mean = sum / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());
  const double tail = (1.0 - level) / 2.0;
  auto at = [&](double q) {
    const auto idx = static_cast<std::size_t>(std::floor(q * static_cast<double>(resamples - 1)));
    return means[std::min(idx, resamples - 1)];
  };
  return {total / static_cast<double>(n), at(tail), at(1.0 - tail)};
}

double empirical_mutual_information(std::span<const std::pair<std::size_t, std::size_t>> samples,
                                    std::size_t nx, std::size_t ny) {
  if (samples.empty()) throw Error(ErrorCode::EmptyInput, "no samples");
  std::vector<double> joint(nx * ny, 0.0), px(nx, 0.0), py(ny, 0.0);
  for (const auto& [x, y] : samples) {
    if (x >= nx || y >= ny) throw Error(ErrorCode::IndexOutOfRange, "symbol outside alphabet");
    joint[x * ny + y] += 1.0;
    px[x] += 1.0;
    py[y] += 1.0;
  }
  const double total = static_cast<double>(samples.size());
  double mi = 0.0;
  for (std::size_t x = 0; x < nx; ++x) {
    for (std::size_t y = 0; y < ny; ++y) {
      const double pxy = joint[x * ny + y] / total;
      if (pxy == 0.0) continue;
      mi += pxy * std::log2(pxy / ((px[x] / total) * (py[y] / total)));
    }
  }
  return std::max(0.0, mi);
}

}  // namespace babble
