#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "babble/metrics.hpp"
#include "babble/session.hpp"

namespace babble {

/// A batch of paired runs: run k of every condition uses seed_base + k.
struct ExperimentPlan {
  SessionConfig base_config;
  std::size_t n_runs_per_condition = 1;
  std::uint64_t seed_base = 0;
  std::vector<FeedbackCondition> conditions{FeedbackCondition::DOT, FeedbackCondition::NonDOT};
  std::filesystem::path output_dir = "results";
  std::size_t workers = 0;  // 0 picks the hardware concurrency
};

/// Relative output_dir values resolve against `base_dir`. Raises ConfigInvalid.
ExperimentPlan plan_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
ExperimentPlan load_plan(const std::filesystem::path& path);

inline constexpr std::size_t kBootstrapResamples = 10000;
inline constexpr double kBootstrapLevel = 0.95;

struct ConditionSummary {
  FeedbackCondition condition = FeedbackCondition::DOT;
  std::size_t runs = 0;
  double mean_final_mar = 0.0;
  double sd_final_mar = 0.0;
  double mean_reward = 0.0;
  double convergence_fraction = 0.0;
  std::optional<double> mean_convergence_time;  // over runs that reached the threshold
};

struct ExperimentSummary {
  std::uint64_t seed_base = 0;
  std::vector<ConditionSummary> conditions;
  std::size_t pairs = 0;
  // Mean DOT - NonDOT final MAR with a paired percentile bootstrap interval.
  std::optional<Interval> dot_minus_nondot;
};

struct RunRecord {
  std::string run_id;
  std::size_t index = 0;  // k, so seed = seed_base + k
  EpisodeLog log;
};

std::string make_run_id(FeedbackCondition condition, std::size_t index);

/// Runs every (condition, k) episode across a worker pool. The result is
/// ordered by condition then k regardless of scheduling.
std::vector<RunRecord> run_batch(const ExperimentPlan& plan);

ExperimentSummary summarize_runs(const std::vector<RunRecord>& runs, std::uint64_t seed_base);

std::string trials_csv(const std::vector<RunRecord>& runs);
std::string aggregate_csv(FeedbackCondition condition, const std::vector<CurveAggregate>& curve);
std::string summary_document(const ExperimentSummary& summary);

/// Runs the plan and writes logs/<run_id>.json, trials.csv,
/// aggregate_<condition>.csv and summary.json under output_dir.
ExperimentSummary run_experiment(const ExperimentPlan& plan);

struct SummarizeReport {
  ExperimentSummary summary;
  std::size_t logs = 0;
  std::vector<std::string> mismatches;  // cached files disagreeing with the recomputation
};

/// Rebuilds every derived file from the raw logs in `results_dir` and
/// compares them with the cached copies. Raises CorruptLog for invalid logs
/// and EmptyInput when no logs exist.
SummarizeReport summarize(const std::filesystem::path& results_dir);

}  // namespace babble
