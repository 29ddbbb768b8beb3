#include "babble/perception.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "babble/errors.hpp"

namespace babble {
namespace {

constexpr double kForeground = 0.9;
constexpr double kBackground = 0.1;
constexpr double kShared = 0.5;

void check_dim(std::size_t expected, std::size_t got) {
  if (expected != got) {
    throw Error(ErrorCode::DimensionMismatch,
                "expected dimension " + std::to_string(expected) + ", got " + std::to_string(got));
  }
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

double decayed(double start, double end, std::uint64_t step, std::size_t steps) {
  if (start <= 0.0 || end <= 0.0) return step == 0 ? start : end;
  if (steps == 0) return end;
  const double frac = std::min(1.0, static_cast<double>(step) / static_cast<double>(steps));
  return start * std::pow(end / start, frac);
}

}  // namespace

FeatureVector prototype(ObjectKind kind, std::size_t dim) {
  if (dim < kNeedCount) throw std::invalid_argument("feature dimension must be at least 3");
  const std::size_t block = dim / kNeedCount;
  FeatureVector fv{std::vector<double>(dim, kBackground)};
  for (std::size_t i = kNeedCount * block; i < dim; ++i) fv.components[i] = kShared;
  const std::size_t first = index_of(kind) * block;
  for (std::size_t i = first; i < first + block; ++i) fv.components[i] = kForeground;
  return fv;
}

FeatureVector synth_features(ObjectKind kind, double noise_sigma, Rng& rng, std::size_t dim) {
  if (noise_sigma < 0.0) throw std::invalid_argument("noise_sigma must be non-negative");
  FeatureVector fv = prototype(kind, dim);
  if (noise_sigma == 0.0) return fv;
  std::normal_distribution<double> noise(0.0, noise_sigma);
  for (double& c : fv.components) c = std::clamp(c + noise(rng), 0.0, 1.0);
  return fv;
}

std::span<const double> SomGrid::node(std::size_t index) const {
  return std::span<const double>(weights).subspan(index * config.dim, config.dim);
}

SomGrid make_som(const SomConfig& config, std::vector<double> weights) {
  if (config.rows == 0 || config.cols == 0 || config.dim == 0) {
    throw std::invalid_argument("SOM grid must have positive shape");
  }
  check_dim(config.rows * config.cols * config.dim, weights.size());
  SomGrid grid;
  grid.config = config;
  grid.weights = std::move(weights);
  grid.learning_rate = config.learning_rate_start;
  grid.radius = config.radius_start;
  grid.label_counts.assign(config.rows * config.cols, {0, 0, 0});
  return grid;
}

SomGrid make_som(const SomConfig& config, Rng& rng) {
  std::vector<double> weights(config.rows * config.cols * config.dim);
  for (double& w : weights) w = uniform01(rng);
  return make_som(config, std::move(weights));
}

std::size_t som_assign(const SomGrid& grid, const FeatureVector& sample) {
  check_dim(grid.config.dim, sample.size());
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < grid.node_count(); ++n) {
    const double d = squared_distance(grid.node(n), sample.components);
    if (d < best_d) {
      best_d = d;
      best = n;
    }
  }
  return best;
}

SomGrid som_train_step(SomGrid grid, const FeatureVector& sample) {
  const std::size_t bmu = som_assign(grid, sample);
  const auto& cfg = grid.config;
  const double br = static_cast<double>(bmu / cfg.cols);
  const double bc = static_cast<double>(bmu % cfg.cols);
  if (grid.learning_rate > 0.0) {
    for (std::size_t n = 0; n < grid.node_count(); ++n) {
      const double dr = static_cast<double>(n / cfg.cols) - br;
      const double dc = static_cast<double>(n % cfg.cols) - bc;
      const double g2 = dr * dr + dc * dc;
      if (n != bmu && g2 > grid.radius * grid.radius) continue;
      const double h = n == bmu ? 1.0 : std::exp(-g2 / (2.0 * grid.radius * grid.radius));
      const double pull = grid.learning_rate * h;
      double* w = grid.weights.data() + n * cfg.dim;
      for (std::size_t i = 0; i < cfg.dim; ++i) w[i] += pull * (sample.components[i] - w[i]);
    }
  }
  ++grid.epoch;
  grid.learning_rate =
      decayed(cfg.learning_rate_start, cfg.learning_rate_end, grid.epoch, cfg.decay_steps);
  grid.radius = decayed(cfg.radius_start, cfg.radius_end, grid.epoch, cfg.decay_steps);
  return grid;
}

SomGrid som_record_label(SomGrid grid, const FeatureVector& sample, ObjectKind kind) {
  const std::size_t bmu = som_assign(grid, sample);
  ++grid.label_counts[bmu][index_of(kind)];
  return grid;
}

InternalStateVector one_hot(NeedKind need) {
  InternalStateVector v;
  v.values[index_of(need)] = 1.0;
  return v;
}

NeedPerceptron NeedPerceptron::zeros(std::size_t dim, double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1]");
  return NeedPerceptron{dim, std::vector<double>(dim * kNeedCount, 0.0), epsilon};
}

InternalStateVector predict_internal_state(const NeedPerceptron& p, const FeatureVector& vf) {
  check_dim(p.dim, vf.size());
  check_dim(p.dim * kNeedCount, p.omega.size());
  InternalStateVector isp;
  for (std::size_t i = 0; i < p.dim; ++i) {
    const double x = vf.components[i];
    for (std::size_t j = 0; j < kNeedCount; ++j) isp.values[j] += x * p.weight(i, j);
  }
  return isp;
}

NeedPerceptron widrow_hoff_update(NeedPerceptron p, const FeatureVector& vf,
                                  const InternalStateVector& ris) {
  std::size_t ones = 0;
  for (double r : ris.values) {
    if (r == 1.0) {
      ++ones;
    } else if (r != 0.0) {
      throw Error(ErrorCode::NotOneHot, "internal state entries must be 0 or 1");
    }
  }
  if (ones != 1) throw Error(ErrorCode::NotOneHot, "internal state must have exactly one active need");

  const InternalStateVector isp = predict_internal_state(p, vf);
  for (std::size_t i = 0; i < p.dim; ++i) {
    for (std::size_t j = 0; j < kNeedCount; ++j) {
      p.omega[i * kNeedCount + j] += p.epsilon * vf.components[i] * (ris.values[j] - isp.values[j]);
    }
  }
  return p;
}

Recognition recognize(const SomGrid& grid, const NeedPerceptron& p, const FeatureVector& vf) {
  check_dim(grid.config.dim, vf.size());
  std::size_t best = grid.node_count();
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < grid.node_count(); ++n) {
    const auto& votes = grid.label_counts[n];
    if (votes[0] + votes[1] + votes[2] == 0) continue;
    const double d = squared_distance(grid.node(n), vf.components);
    if (d < best_d) {
      best_d = d;
      best = n;
    }
  }
  if (best == grid.node_count()) {
    throw Error(ErrorCode::UnlabeledCluster, "no SOM node has been labeled yet");
  }
  const auto& votes = grid.label_counts[best];
  const auto majority = static_cast<std::size_t>(
      std::distance(votes.begin(), std::max_element(votes.begin(), votes.end())));

  Recognition out{kAllObjects[majority], {}};
  const InternalStateVector isp = predict_internal_state(p, vf);
  for (std::size_t j = 0; j < kNeedCount; ++j) out.intensity[j] = std::clamp(isp.values[j], 0.0, 1.0);
  return out;
}

PerNeed<double> stimulus_intensities(const NeedPerceptron& p,
                                     std::span<const FeatureVector> visible) {
  PerNeed<double> s{0.0, 0.0, 0.0};
  for (const FeatureVector& vf : visible) {
    const InternalStateVector isp = predict_internal_state(p, vf);
    for (std::size_t j = 0; j < kNeedCount; ++j) {
      s[j] = std::max(s[j], std::clamp(isp.values[j], 0.0, 1.0));
    }
  }
  return s;
}

ObjectRecognizer::ObjectRecognizer(SomGrid grid, NeedPerceptron perceptron)
    : grid_(std::move(grid)), perceptron_(std::move(perceptron)) {
  check_dim(grid_.config.dim, perceptron_.dim);
}

void ObjectRecognizer::train(const FeatureVector& sample, ObjectKind kind) {
  grid_ = som_train_step(std::move(grid_), sample);
  grid_ = som_record_label(std::move(grid_), sample, kind);
  perceptron_ = widrow_hoff_update(std::move(perceptron_), sample, one_hot(satisfies(kind)));
}

Recognition ObjectRecognizer::recognize(const FeatureVector& sample) const {
  return babble::recognize(grid_, perceptron_, sample);
}

}  // namespace babble
