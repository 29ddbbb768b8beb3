// babble: batch experiments, result verification and the live session server.

#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "babble/episode_io.hpp"
#include "babble/errors.hpp"
#include "babble/experiment.hpp"
#include "babble/http_api.hpp"
#include "babble/service.hpp"

namespace {

enum Exit : int { kOk = 0, kConfigError = 2, kIoError = 3, kValidation = 4 };

int exit_code(babble::ErrorCode code) {
  using babble::ErrorCode;
  switch (code) {
    case ErrorCode::ConfigInvalid:
    case ErrorCode::InvalidConfig:
    case ErrorCode::DegenerateConfig:
    case ErrorCode::CapacityExceeded: return kConfigError;
    case ErrorCode::IoFailure:
    case ErrorCode::EmptyInput: return kIoError;
    default: return kValidation;
  }
}

void print_summary(const babble::ExperimentSummary& s) {
  for (const auto& c : s.conditions) {
    std::cout << babble::to_string(c.condition) << ": runs=" << c.runs
              << " mean_final_mar=" << c.mean_final_mar
              << " convergence_fraction=" << c.convergence_fraction << " mean_convergence_time=";
    if (c.mean_convergence_time) {
      std::cout << *c.mean_convergence_time;
    } else {
      std::cout << "n/a";
    }
    std::cout << "\n";
  }
  if (s.dot_minus_nondot) {
    std::cout << "dot - nondot final MAR: " << s.dot_minus_nondot->estimate << " [95% CI "
              << s.dot_minus_nondot->low << ", " << s.dot_minus_nondot->high << "] over "
              << s.pairs << " pairs\n";
  }
}

int run(const std::string& plan_path) {
  const auto plan = babble::load_plan(plan_path);
  const auto summary = babble::run_experiment(plan);
  print_summary(summary);
  std::cout << "results written to " << plan.output_dir.string() << "\n";
  return kOk;
}

int summarize(const std::string& dir) {
  const auto report = babble::summarize(dir);
  print_summary(report.summary);
  std::cout << report.logs << " logs checked\n";
  if (!report.mismatches.empty()) {
    for (const auto& m : report.mismatches) std::cerr << "Mismatch: " << m << "\n";
    return kValidation;
  }
  std::cout << "0 mismatches\n";
  return kOk;
}

int serve(int port, const std::string& host, const std::string& archive, std::uint64_t seed,
          const std::string& config_path, double feedback_ms) {
  babble::ServiceOptions options;
  options.seed = seed;
  options.feedback_duration_ms = feedback_ms;
  if (!archive.empty()) options.archive_dir = archive;
  if (!config_path.empty()) {
    const auto overrides = nlohmann::json::parse(babble::read_text_file(config_path));
    options.base_config.caregiver.reset();
    options.base_config = babble::apply_config_overrides(options.base_config, overrides);
  }
  babble::SessionService service(options);
  std::cout << "listening on " << host << ":" << port << std::endl;
  if (babble::serve(service, host, port) != 0) {
    std::cerr << "cannot bind " << host << ":" << port << "\n";
    return kIoError;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mutual-learning robot babbling simulator"};
  app.require_subcommand(1);

  std::string plan_path;
  auto* run_cmd = app.add_subcommand("run", "Run a seeded batch experiment from a plan file");
  run_cmd->add_option("--plan", plan_path, "Plan file (JSON)")->required();

  std::string results_dir;
  auto* sum_cmd = app.add_subcommand("summarize", "Recompute and verify a results directory");
  sum_cmd->add_option("dir", results_dir, "Results directory")->required();

  int port = 8080;
  std::string host = "0.0.0.0";
  std::string archive;
  std::string config_path;
  std::uint64_t seed = 0;
  double feedback_ms = 2000.0;
  auto* serve_cmd = app.add_subcommand("serve", "Serve live caregiver sessions over HTTP");
  serve_cmd->add_option("--port", port, "TCP port")->required();
  serve_cmd->add_option("--host", host, "Bind address");
  serve_cmd->add_option("--archive", archive, "Directory for episode logs and the index");
  serve_cmd->add_option("--seed", seed, "Service seed for ids, seeds and condition balancing");
  serve_cmd->add_option("--config", config_path, "Session config overrides (JSON)");
  serve_cmd->add_option("--feedback-ms", feedback_ms, "Feedback animation duration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*run_cmd) return run(plan_path);
    if (*sum_cmd) return summarize(results_dir);
    if (*serve_cmd) return serve(port, host, archive, seed, config_path, feedback_ms);
  } catch (const babble::Error& e) {
    std::cerr << e.what() << "\n";
    return exit_code(e.code());
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "ConfigInvalid: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "ConfigInvalid: " << e.what() << "\n";
    return kConfigError;
  }
  return kOk;
}
