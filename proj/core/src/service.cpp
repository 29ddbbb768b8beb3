#include "babble/service.hpp"

#include <ctime>
#include <fstream>

#include <fmt/format.h>

#include "babble/errors.hpp"

namespace babble {
namespace {

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

ordered_json client_event(const std::string& session_id, const SessionEvent& e,
                          double feedback_duration_ms) {
  ordered_json j;
  j["session"] = session_id;
  j["index"] = e.index;
  j["type"] = to_string(e.kind);
  switch (e.kind) {
    case EventKind::Phase: j["phase"] = to_string(e.phase); break;
    case EventKind::Babble: j["word"] = *e.word; break;
    case EventKind::Evaluate: j["object"] = to_string(*e.object); break;
    case EventKind::Feedback:
      j["valence"] = to_string(e.feedback->valence);
      j["motion"] = to_string(e.feedback->motion);
      j["sound"] = to_string(e.feedback->sound);
      j["duration_ms"] = feedback_duration_ms;
      break;
    case EventKind::Progress:
      j["n"] = e.n;
      j["max"] = e.max;
      break;
    case EventKind::Termination:
      j["converged"] = e.converged;
      j["n"] = e.n;
      break;
  }
  return j;
}

SessionService::Live::Live(std::string id_, FeedbackCondition condition_, Session session_)
    : id(std::move(id_)),
      condition(condition_),
      session(std::move(session_)),
      created_at(utc_timestamp()),
      last_activity(Clock::now().time_since_epoch().count()) {}

SessionService::SessionService(ServiceOptions options)
    : options_(std::move(options)), rng_(make_stream(options_.seed, Stream::Service)) {
  options_.base_config.caregiver.reset();
  validate(options_.base_config);
  if (options_.archive_dir) {
    try {
      std::filesystem::create_directories(*options_.archive_dir);
    } catch (const std::filesystem::filesystem_error& e) {
      throw Error(ErrorCode::IoFailure, e.what());
    }
  }
}

FeedbackCondition SessionService::assign_condition() {
  // Pairs of auto-assigned sessions get one of each condition, first one drawn.
  if (pending_auto_) {
    const auto c = *pending_auto_;
    pending_auto_.reset();
    return c;
  }
  const bool dot_first = uniform_index(rng_, 2) == 0;
  pending_auto_ = dot_first ? FeedbackCondition::NonDOT : FeedbackCondition::DOT;
  return dot_first ? FeedbackCondition::DOT : FeedbackCondition::NonDOT;
}

ordered_json SessionService::create_session(const CreateRequest& request) {
  SessionConfig config;
  try {
    config = apply_config_overrides(options_.base_config, request.overrides);
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidConfig, e.what());
  }
  if (request.overrides.is_object() && request.overrides.contains("caregiver")) {
    throw Error(ErrorCode::InvalidConfig, "caregiver: live sessions are driven by a person");
  }
  config.caregiver.reset();

  std::lock_guard lock(create_mu_);
  config.condition = request.condition ? *request.condition : assign_condition();
  if (!(request.overrides.is_object() && request.overrides.contains("seed"))) {
    config.seed = rng_() >> 1;
  }
  std::string id;
  {
    std::shared_lock read(registry_mu_);
    do {
      id = fmt::format("s{:016x}", rng_());
    } while (sessions_.count(id));
  }
  auto live = std::make_shared<Live>(id, config.condition, Session(config));

  std::lock_guard session_lock(live->mu);
  try {
    drive_until_input(*live);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::DegenerateConfig) throw Error(ErrorCode::InvalidConfig, e.what());
    throw;
  }
  {
    std::unique_lock write(registry_mu_);
    sessions_.emplace(live->id, live);
  }
  return view(*live);
}

std::shared_ptr<SessionService::Live> SessionService::find(const std::string& id) const {
  std::shared_lock lock(registry_mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorCode::UnknownSession, "no session '" + id + "'");
  return it->second;
}

void SessionService::record(Live& live, const std::vector<SessionEvent>& events) {
  for (const auto& e : events) {
    if (e.kind == EventKind::Babble) live.babble_at = Clock::now();
    if (e.kind == EventKind::Feedback) {
      live.input_open_at =
          Clock::now() + std::chrono::duration_cast<Clock::duration>(
                             std::chrono::duration<double, std::milli>(options_.feedback_duration_ms));
    }
    live.events.push_back(client_event(live.id, e, options_.feedback_duration_ms));
  }
  live.cv.notify_all();
}

void SessionService::drive_until_input(Live& live) {
  while (live.session.phase() != SessionPhase::AwaitingObject &&
         live.session.phase() != SessionPhase::Terminated) {
    record(live, live.session.advance());
  }
  if (live.session.phase() == SessionPhase::Terminated) archive(live, "terminated");
}

ordered_json SessionService::view(const Live& live) const {
  const auto& s = live.session;
  ordered_json j;
  j["id"] = live.id;
  j["phase"] = to_string(s.phase());
  j["n"] = s.trials().size();
  j["max"] = s.config().max_iterations;
  j["events"] = live.events.size();
  j["word"] = s.phase() == SessionPhase::AwaitingObject && s.current_word()
                  ? ordered_json(s.current_word()->text())
                  : ordered_json(nullptr);
  j["created_at"] = live.created_at;
  j["survey"] = live.survey ? rating_to_json(*live.survey) : ordered_json(nullptr);
  return j;
}

ordered_json SessionService::get_session(const std::string& id) const {
  auto live = find(id);
  std::lock_guard lock(live->mu);
  return view(*live);
}

ordered_json SessionService::submit_choice(const std::string& id, ObjectKind object) {
  auto live = find(id);
  std::lock_guard lock(live->mu);
  live->last_activity = Clock::now().time_since_epoch().count();
  if (live->session.phase() != SessionPhase::AwaitingObject) {
    throw Error(ErrorCode::WrongPhase, "session is in phase " +
                                           std::string(to_string(live->session.phase())) +
                                           ", not awaiting_object");
  }
  const auto now = Clock::now();
  if (now < live->input_open_at) {
    throw Error(ErrorCode::WrongPhase, "feedback animation still playing");
  }
  const auto latency = std::chrono::duration<double, std::milli>(now - live->babble_at).count();
  live->session.set_pending_latency(latency);

  const std::size_t before = live->events.size();
  record(*live, live->session.advance(object));
  drive_until_input(*live);

  ordered_json events = ordered_json::array();
  for (std::size_t i = before; i < live->events.size(); ++i) events.push_back(live->events[i]);
  return ordered_json{{"accepted", true}, {"session", view(*live)}, {"events", std::move(events)}};
}

ordered_json SessionService::submit_survey(const std::string& id, const SamRating& rating) {
  auto live = find(id);
  std::lock_guard lock(live->mu);
  live->last_activity = Clock::now().time_since_epoch().count();
  if (live->session.phase() != SessionPhase::Terminated) {
    throw Error(ErrorCode::NotTerminated, "survey accepted only after the session ends");
  }
  if (live->survey) throw Error(ErrorCode::DuplicateSurvey, "survey already recorded");
  validate(rating);
  live->survey = rating;
  archive(*live, "survey");
  return ordered_json{{"accepted", true}, {"session", view(*live)}};
}

EventBatch SessionService::events_since(const std::string& id, std::size_t last_event) const {
  auto live = find(id);
  std::lock_guard lock(live->mu);
  EventBatch batch;
  for (std::size_t i = last_event; i < live->events.size(); ++i) batch.events.push_back(live->events[i]);
  batch.finished = live->session.phase() == SessionPhase::Terminated &&
                   last_event + batch.events.size() >= live->events.size();
  return batch;
}

EventBatch SessionService::wait_events(const std::string& id, std::size_t last_event,
                                       std::chrono::milliseconds timeout) const {
  auto live = find(id);
  {
    std::unique_lock lock(live->mu);
    live->cv.wait_for(lock, timeout, [&] {
      return live->events.size() > last_event || live->session.phase() == SessionPhase::Terminated;
    });
  }
  return events_since(id, last_event);
}

std::size_t SessionService::expire_idle(Clock::time_point now) {
  const auto cutoff = (now - options_.idle_timeout).time_since_epoch().count();
  std::vector<std::string> expired;
  {
    std::unique_lock lock(registry_mu_);
    for (auto it = sessions_.begin(); it != sessions_.end();) {
      if (it->second->last_activity.load() < cutoff) {
        expired.push_back(it->first);
        it = sessions_.erase(it);
      } else {
        ++it;
      }
    }
  }
  if (options_.archive_dir) {
    std::lock_guard lock(archive_mu_);
    std::ofstream index(*options_.archive_dir / "index.jsonl", std::ios::app);
    for (const auto& id : expired) index << ordered_json{{"id", id}, {"event", "expired"}}.dump() << "\n";
  }
  return expired.size();
}

FeedbackCondition SessionService::condition_of(const std::string& id) const {
  return find(id)->condition;
}

EpisodeLog SessionService::episode_log(const std::string& id) const {
  auto live = find(id);
  std::lock_guard lock(live->mu);
  EpisodeLog log = live->session.log();
  log.survey = live->survey;
  return log;
}

std::size_t SessionService::session_count() const {
  std::shared_lock lock(registry_mu_);
  return sessions_.size();
}

void SessionService::archive(const Live& live, std::string_view event) {
  if (!options_.archive_dir) return;
  EpisodeLog log = live.session.log();
  log.survey = live.survey;
  const auto file = live.id + ".json";
  write_text_file(*options_.archive_dir / file, serialize_episode(log));

  std::lock_guard lock(archive_mu_);
  std::ofstream index(*options_.archive_dir / "index.jsonl", std::ios::app);
  if (!index) throw Error(ErrorCode::IoFailure, "cannot append to archive index");
  index << ordered_json{{"id", live.id},
                        {"event", event},
                        {"file", file},
                        {"condition", to_string(live.condition)},
                        {"trials", log.trials.size()}}
               .dump()
        << "\n";
}

}  // namespace babble
