#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "babble/needs.hpp"
#include "babble/random.hpp"

namespace babble {

inline constexpr std::size_t kDefaultFeatureDim = 16;

struct FeatureVector {
  std::vector<double> components;

  std::size_t size() const noexcept { return components.size(); }
};

/// Fixed per-object prototype: a distinct block of high components over a low
/// background. Pairwise L2 distance is at least 0.5 * sqrt(dim). dim >= 3.
FeatureVector prototype(ObjectKind kind, std::size_t dim = kDefaultFeatureDim);

/// Prototype plus independent Gaussian noise, clamped to [0, 1].
FeatureVector synth_features(ObjectKind kind, double noise_sigma, Rng& rng,
                             std::size_t dim = kDefaultFeatureDim);

// ---------------------------------------------------------------------------
// Kohonen map with a per-node object label tally.

struct SomConfig {
  std::size_t rows = 4;
  std::size_t cols = 4;
  std::size_t dim = kDefaultFeatureDim;
  double learning_rate_start = 0.5;
  double learning_rate_end = 0.01;
  double radius_start = 2.0;
  double radius_end = 1.0;
  // Steps over which learning rate and radius decay exponentially to their end values.
  std::size_t decay_steps = 160;
};

struct SomGrid {
  SomConfig config;
  std::vector<double> weights;  // node-major, rows * cols * dim
  double learning_rate = 0.0;
  double radius = 0.0;
  std::uint64_t epoch = 0;
  std::vector<std::array<std::uint32_t, kNeedCount>> label_counts;  // per node, per ObjectKind

  std::size_t node_count() const noexcept { return config.rows * config.cols; }
  std::span<const double> node(std::size_t index) const;
};

/// Weights drawn uniformly from [0, 1).
SomGrid make_som(const SomConfig& config, Rng& rng);

/// Grid with explicit weights, mostly for tests and deserialization.
SomGrid make_som(const SomConfig& config, std::vector<double> weights);

/// Best-matching unit by L2 distance, ties to the lowest index.
std::size_t som_assign(const SomGrid& grid, const FeatureVector& sample);

/// Pulls every node within `radius` (grid distance) of the BMU toward the
/// sample with a Gaussian neighbourhood, then decays learning rate and radius.
SomGrid som_train_step(SomGrid grid, const FeatureVector& sample);

/// Adds one vote for `kind` on the sample's BMU.
SomGrid som_record_label(SomGrid grid, const FeatureVector& sample, ObjectKind kind);

// ---------------------------------------------------------------------------
// Linear need readout trained with the Widrow-Hoff rule.

struct InternalStateVector {
  PerNeed<double> values{};
};

InternalStateVector one_hot(NeedKind need);

struct NeedPerceptron {
  std::size_t dim = kDefaultFeatureDim;
  std::vector<double> omega;  // dim x kNeedCount, row-major
  double epsilon = 0.1;

  static NeedPerceptron zeros(std::size_t dim, double epsilon);
  double weight(std::size_t i, std::size_t j) const { return omega[i * kNeedCount + j]; }
};

InternalStateVector predict_internal_state(const NeedPerceptron& p, const FeatureVector& vf);

/// omega_ij += epsilon * vf_i * (ris_j - isp_j), isp from the pre-update weights.
NeedPerceptron widrow_hoff_update(NeedPerceptron p, const FeatureVector& vf,
                                  const InternalStateVector& ris);

struct Recognition {
  ObjectKind object;
  PerNeed<double> intensity;  // clamp(isp, 0, 1)
};

/// Object label from the nearest labeled node (the BMU once the map is
/// trained) and clamped need intensities from the perceptron. Throws
/// UnlabeledCluster when no node carries a label yet.
Recognition recognize(const SomGrid& grid, const NeedPerceptron& p, const FeatureVector& vf);

/// Per-need stimulus intensity over every visible object: the strongest
/// clamped prediction for that need.
PerNeed<double> stimulus_intensities(const NeedPerceptron& p,
                                     std::span<const FeatureVector> visible);

/// SOM + perceptron trained together from labeled samples.
class ObjectRecognizer {
 public:
  ObjectRecognizer(SomGrid grid, NeedPerceptron perceptron);

  void train(const FeatureVector& sample, ObjectKind kind);
  Recognition recognize(const FeatureVector& sample) const;

  const SomGrid& grid() const noexcept { return grid_; }
  const NeedPerceptron& perceptron() const noexcept { return perceptron_; }

 private:
  SomGrid grid_;
  NeedPerceptron perceptron_;
};

}  // namespace babble
