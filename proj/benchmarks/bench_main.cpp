#include <benchmark/benchmark.h>

#include <vector>

#include "babble/metrics.hpp"
#include "babble/perception.hpp"
#include "babble/session.hpp"

namespace {

void BM_RunEpisode(benchmark::State& state) {
  babble::SessionConfig config;
  config.condition = state.range(0) ? babble::FeedbackCondition::DOT : babble::FeedbackCondition::NonDOT;
  std::uint64_t seed = 0;
  for (auto _ : state) {
    config.seed = seed++;
    benchmark::DoNotOptimize(babble::run_episode(config));
  }
}
BENCHMARK(BM_RunEpisode)->Arg(1)->Arg(0);

void BM_SomTrainStep(benchmark::State& state) {
  babble::Rng rng = babble::make_stream(1, babble::Stream::Perception);
  babble::SomGrid grid = babble::make_som(babble::SomConfig{}, rng);
  const auto sample = babble::synth_features(babble::ObjectKind::Drink, 0.05, rng);
  for (auto _ : state) {
    grid = babble::som_train_step(std::move(grid), sample);
    benchmark::DoNotOptimize(grid.weights.data());
  }
}
BENCHMARK(BM_SomTrainStep);

void BM_WidrowHoff(benchmark::State& state) {
  babble::Rng rng = babble::make_stream(2, babble::Stream::Noise);
  auto p = babble::NeedPerceptron::zeros(babble::kDefaultFeatureDim, 0.1);
  const auto vf = babble::synth_features(babble::ObjectKind::Cookie, 0.05, rng);
  const auto ris = babble::one_hot(babble::NeedKind::Hunger);
  for (auto _ : state) {
    p = babble::widrow_hoff_update(std::move(p), vf, ris);
    benchmark::DoNotOptimize(p.omega.data());
  }
}
BENCHMARK(BM_WidrowHoff);

void BM_MarCurve(benchmark::State& state) {
  babble::Rng rng = babble::make_stream(3, babble::Stream::Policy);
  std::vector<int> rewards(static_cast<std::size_t>(state.range(0)));
  for (int& r : rewards) r = babble::uniform_index(rng, 2) ? 1 : -1;
  for (auto _ : state) benchmark::DoNotOptimize(babble::mar_curve(rewards, 5));
}
BENCHMARK(BM_MarCurve)->Arg(16)->Arg(1024);

}  // namespace

BENCHMARK_MAIN();
