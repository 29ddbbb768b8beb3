#include "babble/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include "babble/episode_io.hpp"
#include "babble/errors.hpp"

namespace babble {
namespace fs = std::filesystem;
namespace {

using json = nlohmann::json;

[[noreturn]] void invalid(const std::string& field, const std::string& why) {
  throw Error(ErrorCode::ConfigInvalid, "plan." + field + ": " + why);
}

std::vector<int> final_rewards(const EpisodeLog& log) { return log.rewards(); }

double final_mar(const EpisodeLog& log) { return log.trials.back().mar; }

std::string number(double x) { return fmt::format("{}", x); }

std::vector<RunRecord> runs_of(const std::vector<RunRecord>& runs, FeedbackCondition c) {
  std::vector<RunRecord> out;
  for (const auto& r : runs) {
    if (r.log.config.condition == c) out.push_back(r);
  }
  return out;
}

std::vector<FeedbackCondition> conditions_in(const std::vector<RunRecord>& runs) {
  std::vector<FeedbackCondition> out;
  for (const auto& r : runs) {
    if (std::find(out.begin(), out.end(), r.log.config.condition) == out.end()) {
      out.push_back(r.log.config.condition);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<CurveAggregate> curve_for(const std::vector<RunRecord>& runs) {
  std::vector<std::vector<int>> series;
  for (const auto& r : runs) series.push_back(final_rewards(r.log));
  return aggregate_runs(series, runs.front().log.config.mar_window);
}

fs::path aggregate_path(const fs::path& dir, FeedbackCondition c) {
  return dir / ("aggregate_" + std::string(to_string(c)) + ".csv");
}

template <class F>
void guarded_io(F&& f) {
  try {
    f();
  } catch (const fs::filesystem_error& e) {
    throw Error(ErrorCode::IoFailure, e.what());
  }
}

}  // namespace

ExperimentPlan plan_from_json(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) invalid("root", "expected an object");
  ExperimentPlan plan;
  for (const auto& [key, v] : j.items()) {
    if (key == "base_config") {
      plan.base_config = apply_config_overrides(SessionConfig{}, v);
    } else if (key == "n_runs_per_condition") {
      if (!v.is_number_integer() || v.get<std::int64_t>() < 1) invalid(key, "must be an integer >= 1");
      plan.n_runs_per_condition = v.get<std::size_t>();
    } else if (key == "seed_base") {
      if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0))
        invalid(key, "must be a non-negative integer");
      plan.seed_base = v.get<std::uint64_t>();
    } else if (key == "conditions") {
      if (!v.is_array() || v.empty()) invalid(key, "must be a non-empty array");
      plan.conditions.clear();
      for (const auto& c : v) {
        const auto cond = c.is_string() ? parse_condition(c.get<std::string>()) : std::nullopt;
        if (!cond) invalid(key, "entries must be \"dot\" or \"nondot\"");
        if (std::find(plan.conditions.begin(), plan.conditions.end(), *cond) != plan.conditions.end())
          invalid(key, "lists a condition twice");
        plan.conditions.push_back(*cond);
      }
    } else if (key == "output_dir") {
      if (!v.is_string()) invalid(key, "must be a path string");
      plan.output_dir = v.get<std::string>();
    } else if (key == "workers") {
      if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0))
        invalid(key, "must be a non-negative integer");
      plan.workers = v.get<std::size_t>();
    } else {
      invalid(key, "unknown field");
    }
  }
  if (!plan.base_config.caregiver) invalid("base_config.caregiver", "batch runs need a simulated caregiver");
  if (plan.output_dir.is_relative() && !base_dir.empty()) plan.output_dir = base_dir / plan.output_dir;
  return plan;
}

ExperimentPlan load_plan(const fs::path& path) {
  const std::string text = read_text_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ConfigInvalid, path.string() + ": " + e.what());
  }
  return plan_from_json(j, path.parent_path());
}

std::string make_run_id(FeedbackCondition condition, std::size_t index) {
  return fmt::format("{}-{:04}", to_string(condition), index);
}

std::vector<RunRecord> run_batch(const ExperimentPlan& plan) {
  struct Job {
    FeedbackCondition condition;
    std::size_t index;
  };
  std::vector<Job> jobs;
  for (auto c : plan.conditions) {
    for (std::size_t k = 0; k < plan.n_runs_per_condition; ++k) jobs.push_back({c, k});
  }

  std::vector<std::optional<RunRecord>> slots(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;

  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        SessionConfig cfg = plan.base_config;
        cfg.condition = jobs[i].condition;
        cfg.seed = plan.seed_base + jobs[i].index;
        slots[i] = RunRecord{make_run_id(jobs[i].condition, jobs[i].index), jobs[i].index,
                             run_episode(cfg)};
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };

  std::size_t workers = plan.workers ? plan.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, std::max<std::size_t>(jobs.size(), 1));
  std::vector<std::jthread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  pool.clear();
  if (failure) std::rethrow_exception(failure);

  std::vector<RunRecord> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

ExperimentSummary summarize_runs(const std::vector<RunRecord>& runs, std::uint64_t seed_base) {
  if (runs.empty()) throw Error(ErrorCode::EmptyInput, "no runs to summarize");
  ExperimentSummary summary;
  summary.seed_base = seed_base;

  std::map<FeedbackCondition, std::map<std::size_t, double>> finals;
  for (auto c : conditions_in(runs)) {
    const auto subset = runs_of(runs, c);
    ConditionSummary s;
    s.condition = c;
    s.runs = subset.size();
    double sum_final = 0.0, sum_reward = 0.0, sum_time = 0.0;
    std::size_t rewards = 0, converged = 0, timed = 0;
    for (const auto& r : subset) {
      const double f = final_mar(r.log);
      finals[c][r.index] = f;
      sum_final += f;
      for (const auto& t : r.log.trials) sum_reward += t.reward;
      rewards += r.log.trials.size();
      if (r.log.converged) ++converged;
      if (r.log.convergence_time) {
        sum_time += static_cast<double>(*r.log.convergence_time);
        ++timed;
      }
    }
    const double n = static_cast<double>(s.runs);
    s.mean_final_mar = sum_final / n;
    double ss = 0.0;
    for (const auto& r : subset) ss += std::pow(final_mar(r.log) - s.mean_final_mar, 2);
    s.sd_final_mar = std::sqrt(ss / n);
    s.mean_reward = sum_reward / static_cast<double>(rewards);
    s.convergence_fraction = static_cast<double>(converged) / n;
    if (timed) s.mean_convergence_time = sum_time / static_cast<double>(timed);
    summary.conditions.push_back(s);
  }

  const auto& dot = finals[FeedbackCondition::DOT];
  const auto& nondot = finals[FeedbackCondition::NonDOT];
  std::vector<double> diffs;
  for (const auto& [k, f] : dot) {
    if (auto it = nondot.find(k); it != nondot.end()) diffs.push_back(f - it->second);
  }
  summary.pairs = diffs.size();
  if (!diffs.empty()) {
    Rng rng = make_stream(seed_base, Stream::Bootstrap);
    summary.dot_minus_nondot = paired_bootstrap_ci(diffs, kBootstrapResamples, kBootstrapLevel, rng);
  }
  return summary;
}

std::string trials_csv(const std::vector<RunRecord>& runs) {
  std::string out =
      "run_id,condition,seed,n,expressed_need,word,object,reward,mar,converged,convergence_time\n";
  for (const auto& r : runs) {
    const auto& log = r.log;
    const std::string conv_time =
        log.convergence_time ? std::to_string(*log.convergence_time) : std::string();
    for (const auto& t : log.trials) {
      out += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", r.run_id,
                         to_string(log.config.condition), log.config.seed, t.n,
                         to_string(t.expressed_need), t.word, to_string(t.offered_object), t.reward,
                         number(t.mar), log.converged ? "true" : "false", conv_time);
    }
  }
  return out;
}

std::string aggregate_csv(FeedbackCondition condition, const std::vector<CurveAggregate>& curve) {
  std::string out =
      "# sd_mar is the population standard deviation over the runs lasting at least that many "
      "iterations\n";
  out += "iteration,mean_mar,sd_mar,count,condition\n";
  for (std::size_t i = 0; i < curve.size(); ++i) {
    out += fmt::format("{},{},{},{},{}\n", i + 1, number(curve[i].mean), number(curve[i].sd),
                       curve[i].count, to_string(condition));
  }
  return out;
}

std::string summary_document(const ExperimentSummary& s) {
  ordered_json j;
  j["seed_base"] = s.seed_base;
  ordered_json conds = ordered_json::object();
  for (const auto& c : s.conditions) {
    conds[std::string(to_string(c.condition))] = ordered_json{
        {"runs", c.runs},
        {"mean_final_mar", c.mean_final_mar},
        {"sd_final_mar", c.sd_final_mar},
        {"mean_reward", c.mean_reward},
        {"convergence_fraction", c.convergence_fraction},
        {"mean_convergence_time",
         c.mean_convergence_time ? ordered_json(*c.mean_convergence_time) : ordered_json(nullptr)}};
  }
  j["conditions"] = std::move(conds);
  if (s.dot_minus_nondot) {
    j["paired_final_mar_difference"] =
        ordered_json{{"comparison", "dot - nondot"},
                     {"pairs", s.pairs},
                     {"mean", s.dot_minus_nondot->estimate},
                     {"ci_low", s.dot_minus_nondot->low},
                     {"ci_high", s.dot_minus_nondot->high},
                     {"level", kBootstrapLevel},
                     {"resamples", kBootstrapResamples},
                     {"method", "paired percentile bootstrap"}};
  } else {
    j["paired_final_mar_difference"] = nullptr;
  }
  j["sd_definition"] = "population";
  return j.dump(2) + "\n";
}

ExperimentSummary run_experiment(const ExperimentPlan& plan) {
  validate(plan.base_config);
  if (!plan.base_config.caregiver) {
    throw Error(ErrorCode::ConfigInvalid, "plan.base_config.caregiver: batch runs need a simulated caregiver");
  }
  const fs::path logs_dir = plan.output_dir / "logs";
  guarded_io([&] {
    fs::create_directories(logs_dir);
    for (const auto& entry : fs::directory_iterator(logs_dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".json") fs::remove(entry.path());
    }
  });

  const auto runs = run_batch(plan);
  for (const auto& r : runs) write_text_file(logs_dir / (r.run_id + ".json"), serialize_episode(r.log));
  write_text_file(plan.output_dir / "trials.csv", trials_csv(runs));
  for (auto c : conditions_in(runs)) {
    write_text_file(aggregate_path(plan.output_dir, c), aggregate_csv(c, curve_for(runs_of(runs, c))));
  }
  const auto summary = summarize_runs(runs, plan.seed_base);
  write_text_file(plan.output_dir / "summary.json", summary_document(summary));
  return summary;
}

SummarizeReport summarize(const fs::path& dir) {
  const fs::path logs_dir = dir / "logs";
  std::vector<fs::path> files;
  guarded_io([&] {
    if (!fs::is_directory(dir)) throw Error(ErrorCode::IoFailure, dir.string() + " is not a directory");
    if (fs::is_directory(logs_dir)) {
      for (const auto& entry : fs::directory_iterator(logs_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
      }
    }
  });
  if (files.empty()) {
    throw Error(ErrorCode::EmptyInput, "found 0 episode logs under " + logs_dir.string());
  }

  std::vector<RunRecord> runs;
  std::optional<std::uint64_t> seed_base;
  for (const auto& path : files) {
    const std::string name = path.filename().string();
    EpisodeLog log = read_episode_file(path);
    check_episode(log, name);

    const std::string stem = path.stem().string();
    const auto dash = stem.rfind('-');
    const auto cond = dash == std::string::npos ? std::nullopt : parse_condition(stem.substr(0, dash));
    std::size_t k = 0;
    try {
      k = dash == std::string::npos ? 0 : std::stoul(stem.substr(dash + 1));
    } catch (const std::exception&) {
      throw Error(ErrorCode::CorruptLog, name + ": file name is not <condition>-<index>.json");
    }
    if (!cond || *cond != log.config.condition) {
      throw Error(ErrorCode::CorruptLog, name + ": field 'config.condition' disagrees with the file name");
    }
    if (log.config.seed < k) throw Error(ErrorCode::CorruptLog, name + ": field 'config.seed' precedes run index");
    const std::uint64_t base = log.config.seed - k;
    if (seed_base && *seed_base != base) {
      throw Error(ErrorCode::CorruptLog, name + ": field 'config.seed' breaks the seed_base + k pairing");
    }
    seed_base = base;
    runs.push_back(RunRecord{make_run_id(log.config.condition, k), k, std::move(log)});
  }
  std::sort(runs.begin(), runs.end(), [](const RunRecord& a, const RunRecord& b) {
    return std::pair(a.log.config.condition, a.index) < std::pair(b.log.config.condition, b.index);
  });

  SummarizeReport report;
  report.logs = runs.size();
  report.summary = summarize_runs(runs, *seed_base);

  auto compare = [&](const fs::path& path, const std::string& expected) {
    std::string cached;
    try {
      cached = read_text_file(path);
    } catch (const Error&) {
      report.mismatches.push_back(path.filename().string() + " (missing)");
      return;
    }
    if (cached != expected) report.mismatches.push_back(path.filename().string());
  };
  compare(dir / "trials.csv", trials_csv(runs));
  for (auto c : conditions_in(runs)) {
    compare(aggregate_path(dir, c), aggregate_csv(c, curve_for(runs_of(runs, c))));
  }
  compare(dir / "summary.json", summary_document(report.summary));
  return report;
}

}  // namespace babble
