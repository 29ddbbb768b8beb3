#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "babble/episode_io.hpp"
#include "babble/session.hpp"

namespace babble {

struct ServiceOptions {
  // Defaults for every live session; the caregiver field is ignored.
  SessionConfig base_config{};
  std::optional<std::filesystem::path> archive_dir;
  std::uint64_t seed = 0;
  // Choices are refused (WrongPhase) until the last feedback animation ends.
  double feedback_duration_ms = 2000.0;
  std::chrono::minutes idle_timeout{30};
};

struct CreateRequest {
  std::optional<FeedbackCondition> condition;  // nullopt = auto-assign
  nlohmann::json overrides = nlohmann::json::object();
};

struct EventBatch {
  std::vector<ordered_json> events;
  bool finished = false;  // session terminated and everything up to its last event delivered
};

/// Live sessions with a human caregiver. Each session is guarded by its own
/// mutex; the registry lock is only held for lookup, insert and expiry.
/// Client-visible payloads never carry the feedback condition or the
/// expressed need.
class SessionService {
 public:
  using Clock = std::chrono::steady_clock;

  explicit SessionService(ServiceOptions options);

  ordered_json create_session(const CreateRequest& request);
  ordered_json get_session(const std::string& id) const;
  ordered_json submit_choice(const std::string& id, ObjectKind object);
  ordered_json submit_survey(const std::string& id, const SamRating& rating);

  /// Events with index > last_event.
  EventBatch events_since(const std::string& id, std::size_t last_event) const;
  /// Like events_since but blocks up to `timeout` for something new.
  EventBatch wait_events(const std::string& id, std::size_t last_event,
                         std::chrono::milliseconds timeout) const;

  /// Drops sessions idle for longer than the configured timeout.
  std::size_t expire_idle(Clock::time_point now);

  // Server-side views, never exposed over HTTP.
  FeedbackCondition condition_of(const std::string& id) const;
  EpisodeLog episode_log(const std::string& id) const;
  std::size_t session_count() const;

  const ServiceOptions& options() const noexcept { return options_; }

 private:
  struct Live {
    Live(std::string id, FeedbackCondition condition, Session session);

    mutable std::mutex mu;
    mutable std::condition_variable cv;
    const std::string id;
    const FeedbackCondition condition;
    Session session;
    std::vector<ordered_json> events;
    Clock::time_point babble_at{};
    Clock::time_point input_open_at{};  // end of the last feedback animation
    std::optional<SamRating> survey;
    std::string created_at;
    std::atomic<Clock::rep> last_activity;
  };

  std::shared_ptr<Live> find(const std::string& id) const;
  void record(Live& live, const std::vector<SessionEvent>& events);
  void drive_until_input(Live& live);
  ordered_json view(const Live& live) const;
  void archive(const Live& live, std::string_view event);
  FeedbackCondition assign_condition();

  ServiceOptions options_;

  mutable std::shared_mutex registry_mu_;
  std::unordered_map<std::string, std::shared_ptr<Live>> sessions_;

  std::mutex create_mu_;
  Rng rng_;
  std::optional<FeedbackCondition> pending_auto_;

  std::mutex archive_mu_;
};

/// Client payload for one engine event.
ordered_json client_event(const std::string& session_id, const SessionEvent& event,
                          double feedback_duration_ms);

}  // namespace babble
