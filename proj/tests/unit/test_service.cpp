#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <set>
#include <thread>
#include <unistd.h>

#include <httplib.h>

#include "babble/episode_io.hpp"
#include "babble/errors.hpp"
#include "babble/http_api.hpp"
#include "babble/service.hpp"

namespace fs = std::filesystem;
using namespace babble;
using json = nlohmann::json;

namespace {

fs::path temp_dir() {
  static std::atomic<int> counter{0};
  auto p = fs::temp_directory_path() / ("babble_service_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  fs::remove_all(p);
  return p;
}

class ServiceTest : public ::testing::Test {
 protected:
  void SetUp() override {
    archive_ = temp_dir();
    ServiceOptions opts;
    opts.archive_dir = archive_;
    opts.seed = 17;
    opts.feedback_duration_ms = 0.0;
    service_ = std::make_unique<SessionService>(opts);
    mount_routes(server_, *service_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  void TearDown() override {
    server_.stop();
    thread_.join();
    fs::remove_all(archive_);
  }

  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(10, 0);
    return c;
  }

  json post(const std::string& path, const json& body, int expect) {
    auto res = client().Post(path, body.dump(), "application/json");
    EXPECT_TRUE(res) << path;
    if (!res) return {};
    EXPECT_EQ(res->status, expect) << path << " " << res->body;
    return json::parse(res->body);
  }

  json get(const std::string& path, int expect = 200) {
    auto res = client().Get(path);
    EXPECT_TRUE(res) << path;
    if (!res) return {};
    EXPECT_EQ(res->status, expect) << res->body;
    return json::parse(res->body);
  }

  std::string create(const json& body = json::object()) { return post("/sessions", body, 201)["id"]; }

  json choose(const std::string& id, const std::string& object, int expect = 200) {
    return post("/sessions/" + id + "/choice", json{{"object", object}}, expect);
  }

  // Plays until termination with a fixed object sequence (cycled).
  void play(const std::string& id, const std::vector<std::string>& objects) {
    for (std::size_t k = 0; get("/sessions/" + id)["phase"] == "awaiting_object"; ++k)
      choose(id, objects[k % objects.size()]);
  }

  fs::path archive_;
  std::unique_ptr<SessionService> service_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

std::vector<json> parse_sse(const std::string& body) {
  std::vector<json> out;
  std::size_t pos = 0;
  while ((pos = body.find("data: ", pos)) != std::string::npos) {
    const auto end = body.find('\n', pos);
    out.push_back(json::parse(body.substr(pos + 6, end - pos - 6)));
    pos = end;
  }
  return out;
}

std::set<std::string> keys_of(const json& j) {
  std::set<std::string> k;
  for (const auto& [key, _] : j.items()) k.insert(key);
  return k;
}

}  // namespace

TEST_F(ServiceTest, CreateAndInspect) {
  const auto res = post("/sessions", json{{"condition", "dot"}}, 201);
  EXPECT_EQ(res["phase"], "awaiting_object");
  EXPECT_EQ(res["n"], 0);
  EXPECT_EQ(res["max"], 16);
  EXPECT_TRUE(res["word"].is_string());
  EXPECT_FALSE(res.contains("condition"));
  const std::string id = res["id"];
  EXPECT_EQ(service_->condition_of(id), FeedbackCondition::DOT);
  EXPECT_EQ(get("/sessions/" + id)["word"], res["word"]);
}

TEST_F(ServiceTest, AutoAssignBalances) {
  std::map<FeedbackCondition, int> counts;
  std::vector<FeedbackCondition> order;
  for (int k = 0; k < 10; ++k) {
    const auto id = create(json{{"condition", "auto"}});
    const auto c = service_->condition_of(id);
    ++counts[c];
    order.push_back(c);
    if (k % 2 == 1) EXPECT_NE(order[k], order[k - 1]);
  }
  EXPECT_EQ(counts[FeedbackCondition::DOT], 5);
  EXPECT_EQ(counts[FeedbackCondition::NonDOT], 5);

  // Same service seed, same assignment order.
  ServiceOptions opts;
  opts.seed = 17;
  SessionService again(opts);
  for (int k = 0; k < 10; ++k) EXPECT_EQ(again.condition_of(again.create_session({})["id"]), order[k]);
}

TEST_F(ServiceTest, InvalidConfig) {
  auto err = post("/sessions", json{{"overrides", {{"theta", -1}}}}, 400);
  EXPECT_EQ(err["error"]["code"], "InvalidConfig");
  err = post("/sessions", json{{"overrides", {{"caregiver", {{"kind", "oracle"}}}}}}, 400);
  EXPECT_EQ(err["error"]["code"], "InvalidConfig");
  err = post("/sessions", json{{"condition", "both"}}, 400);
  EXPECT_EQ(err["error"]["code"], "InvalidConfig");
  auto res = client().Post("/sessions", "{oops", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
  EXPECT_EQ(service_->session_count(), 0u);
}

TEST_F(ServiceTest, UnknownSession) {
  EXPECT_EQ(get("/sessions/nope", 404)["error"]["code"], "UnknownSession");
  EXPECT_EQ(choose("nope", "cookie", 404)["error"]["code"], "UnknownSession");
  EXPECT_EQ(get("/sessions/nope/events?follow=0", 404)["error"]["code"], "UnknownSession");
}

TEST_F(ServiceTest, ChoiceEmitsFeedbackEvents) {
  const auto id = create();
  const auto ack = choose(id, "drink");
  EXPECT_TRUE(ack["accepted"]);
  std::vector<std::string> types;
  for (const auto& e : ack["events"]) {
    types.push_back(e["type"]);
    EXPECT_EQ(e["session"], id);
    if (e["type"] == "feedback") {
      EXPECT_EQ(e["duration_ms"], 0.0);
      const auto motion = parse_motion(e["motion"].get<std::string>());
      const auto sound = parse_sound(e["sound"].get<std::string>());
      const auto valence = parse_valence(e["valence"].get<std::string>());
      ASSERT_TRUE(motion && sound && valence);
      const FeedbackSignal f{*valence, *motion, *sound};
      if (*valence == Valence::Negative) EXPECT_EQ(f, negative_feedback());
      else EXPECT_TRUE(positive_pair_index(f).has_value());
    }
  }
  ASSERT_GE(types.size(), 6u);
  EXPECT_EQ(types[1], "evaluate");
  EXPECT_EQ(ack["events"][1]["object"], "drink");
  EXPECT_NE(std::find(types.begin(), types.end(), "feedback"), types.end());
  EXPECT_NE(std::find(types.begin(), types.end(), "progress"), types.end());
  EXPECT_EQ(ack["session"]["n"], 1);
  EXPECT_EQ(choose(id, "banana", 409)["error"]["code"], "UnexpectedInput");
}

TEST_F(ServiceTest, ChoiceAfterTermination) {
  const auto id = create(json{{"overrides", {{"min_iterations", 2}, {"max_iterations", 2}}}});
  play(id, {"cookie"});
  EXPECT_EQ(get("/sessions/" + id)["phase"], "terminated");
  EXPECT_EQ(choose(id, "cookie", 409)["error"]["code"], "WrongPhase");
}

TEST_F(ServiceTest, ReconnectReplaysFromIndex) {
  const auto id = create();
  choose(id, "cookie");
  const auto all = get("/sessions/" + id + "/events?follow=0");
  ASSERT_GT(all["events"].size(), 5u);
  const auto tail = get("/sessions/" + id + "/events?follow=0&last_event=3");
  EXPECT_EQ(tail["events"][0]["index"], 4);
  EXPECT_EQ(tail["events"].size(), all["events"].size() - 3);
  EXPECT_EQ(tail["events"][0], all["events"][3]);
  EXPECT_FALSE(tail["finished"]);
  EXPECT_EQ(get("/sessions/" + id + "/events?follow=0&last_event=x", 400)["error"]["code"], "IndexOutOfRange");
}

TEST_F(ServiceTest, EventStreamWithLastEventIdHeader) {
  const auto id = create(json{{"overrides", {{"min_iterations", 3}, {"max_iterations", 3}}}});
  std::string body;
  std::thread reader([&] {
    auto c = client();
    c.Get("/sessions/" + id + "/events", httplib::Headers{{"Last-Event-ID", "3"}},
          [&](const char* data, std::size_t len) {
            body.append(data, len);
            return true;
          });
  });
  std::this_thread::sleep_for(std::chrono::milliseconds(50));
  play(id, {"teddy_bear", "cookie", "drink"});
  reader.join();
  const auto events = parse_sse(body);
  ASSERT_FALSE(events.empty());
  EXPECT_EQ(events.front()["index"], 4);
  EXPECT_EQ(events.back()["type"], "termination");
  for (std::size_t i = 1; i < events.size(); ++i) EXPECT_EQ(events[i]["index"], events[i - 1]["index"].get<int>() + 1);
  EXPECT_NE(body.find("id: 4\nevent: "), std::string::npos);
  const auto all = get("/sessions/" + id + "/events?follow=0");
  EXPECT_TRUE(all["finished"]);
  EXPECT_EQ(events.size() + 3, all["events"].size());
}

TEST_F(ServiceTest, ConcurrentSessionsStayIsolated) {
  std::vector<std::string> ids;
  for (int k = 0; k < 6; ++k) ids.push_back(create());
  std::vector<std::thread> workers;
  std::atomic<int> failures{0};
  for (const auto& id : ids) {
    workers.emplace_back([&, id] {
      auto c = client();
      for (int k = 0; k < 40; ++k) {
        auto s = c.Get("/sessions/" + id);
        if (!s || json::parse(s->body)["phase"] != "awaiting_object") break;
        auto r = c.Post("/sessions/" + id + "/choice", json{{"object", k % 2 ? "cookie" : "drink"}}.dump(),
                        "application/json");
        if (!r || r->status != 200) ++failures;
      }
    });
  }
  for (auto& w : workers) w.join();
  EXPECT_EQ(failures, 0);
  for (const auto& id : ids) {
    const auto ev = get("/sessions/" + id + "/events?follow=0");
    EXPECT_TRUE(ev["finished"]);
    int expected = 1;
    for (const auto& e : ev["events"]) {
      EXPECT_EQ(e["session"], id);
      EXPECT_EQ(e["index"], expected++);
    }
    EXPECT_NO_THROW(check_episode(service_->episode_log(id), id));
  }
}

TEST_F(ServiceTest, SurveyFlow) {
  const auto id = create(json{{"overrides", {{"min_iterations", 1}, {"max_iterations", 1}}}});
  const json rating{{"valence", 3}, {"arousal", 2}, {"dominance", 4}};
  EXPECT_EQ(post("/sessions/" + id + "/survey", rating, 409)["error"]["code"], "NotTerminated");
  choose(id, "cookie");
  EXPECT_EQ(post("/sessions/" + id + "/survey", json{{"valence", 6}, {"arousal", 2}, {"dominance", 4}}, 400)["error"]["code"],
            "RangeViolation");
  post("/sessions/" + id + "/survey", rating, 200);
  EXPECT_EQ(post("/sessions/" + id + "/survey", rating, 409)["error"]["code"], "DuplicateSurvey");
  EXPECT_EQ(get("/sessions/" + id)["survey"]["dominance"], 4);

  const auto archived = read_episode_file(archive_ / (id + ".json"));
  ASSERT_TRUE(archived.survey.has_value());
  EXPECT_EQ(archived.survey->arousal, 2);
  EXPECT_NO_THROW(check_episode(archived, id));
  std::ifstream index(archive_ / "index.jsonl");
  std::vector<json> lines;
  for (std::string line; std::getline(index, line);) lines.push_back(json::parse(line));
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[0]["event"], "terminated");
  EXPECT_EQ(lines[1]["event"], "survey");
}

TEST_F(ServiceTest, BlindingAndIdenticalSchemas) {
  const auto dot = create(json{{"condition", "dot"}, {"overrides", {{"seed", 5}}}});
  const auto nondot = create(json{{"condition", "nondot"}, {"overrides", {{"seed", 5}}}});
  play(dot, {"cookie", "drink", "teddy_bear"});
  play(nondot, {"cookie", "drink", "teddy_bear"});
  std::map<std::string, std::set<std::string>> schema[2];
  int side = 0;
  for (const auto& id : {dot, nondot}) {
    std::vector<std::string> payloads{get("/sessions/" + id).dump()};
    for (const auto& e : get("/sessions/" + id + "/events?follow=0")["events"]) {
      schema[side][e["type"]] = keys_of(e);
      payloads.push_back(e.dump());
    }
    for (const auto& p : payloads) {
      for (const char* leak : {"condition", "\"dot\"", "nondot", "need", "reward", "hunger", "thirst", "curiosity"})
        EXPECT_EQ(p.find(leak), std::string::npos) << p;
    }
    ++side;
  }
  EXPECT_EQ(schema[0], schema[1]);
}

TEST_F(ServiceTest, LiveMatchesOfflineRun) {
  for (auto condition : {FeedbackCondition::DOT, FeedbackCondition::NonDOT}) {
    SessionConfig offline;
    offline.caregiver = CaregiverConfig{CaregiverKind::Oracle, {}};
    offline.seed = 4242;
    offline.condition = condition;
    const auto reference = run_episode(offline);

    const auto id = create(json{{"condition", std::string(to_string(condition))}, {"overrides", {{"seed", 4242}}}});
    for (const auto& t : reference.trials) choose(id, std::string(to_string(t.offered_object)));
    EXPECT_EQ(get("/sessions/" + id)["phase"], "terminated");

    auto live = service_->episode_log(id);
    for (auto& t : live.trials) {
      EXPECT_TRUE(t.latency_ms.has_value());
      t.latency_ms.reset();
    }
    auto expected = reference;
    expected.config.caregiver.reset();
    EXPECT_EQ(serialize_episode(live), serialize_episode(expected));
  }
}

TEST_F(ServiceTest, FuzzedRequestsKeepLogsValid) {
  Rng rng(99);
  std::vector<std::string> ids;
  for (int k = 0; k < 3; ++k) ids.push_back(create(json{{"overrides", {{"min_iterations", 4}, {"max_iterations", 6}}}}));
  const std::vector<std::string> objects{"cookie", "drink", "teddy_bear", "rock"};
  auto c = client();
  for (int k = 0; k < 120; ++k) {
    const auto& id = ids[uniform_index(rng, ids.size())];
    switch (uniform_index(rng, 4)) {
      case 0:
        c.Post("/sessions/" + id + "/choice", json{{"object", objects[uniform_index(rng, 4)]}}.dump(), "application/json");
        break;
      case 1:
        c.Post("/sessions/" + id + "/survey", json{{"valence", uniform_index(rng, 7)}, {"arousal", 3}, {"dominance", 3}}.dump(),
               "application/json");
        break;
      case 2: c.Get("/sessions/" + id + "/events?follow=0&last_event=" + std::to_string(uniform_index(rng, 60))); break;
      default: c.Post("/sessions/" + id + "/choice", "garbage", "application/json"); break;
    }
  }
  for (const auto& id : ids) {
    const auto log = service_->episode_log(id);
    if (!log.trials.empty() && get("/sessions/" + id)["phase"] == "terminated") {
      EXPECT_NO_THROW(check_episode(log, id));
    }
    int expected = 1;
    for (const auto& e : get("/sessions/" + id + "/events?follow=0")["events"]) EXPECT_EQ(e["index"], expected++);
  }
}

TEST(Service, FeedbackAnimationBlocksChoices) {
  ServiceOptions opts;
  opts.feedback_duration_ms = 150.0;
  SessionService service(opts);
  const std::string id = service.create_session({})["id"];
  const auto ack = service.submit_choice(id, ObjectKind::Cookie);
  bool saw_duration = false;
  for (const auto& e : ack["events"])
    if (e["type"] == "feedback") saw_duration = e["duration_ms"] == 150.0;
  EXPECT_TRUE(saw_duration);
  try {
    service.submit_choice(id, ObjectKind::Cookie);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::WrongPhase);
  }
  std::this_thread::sleep_for(std::chrono::milliseconds(200));
  EXPECT_NO_THROW(service.submit_choice(id, ObjectKind::Cookie));
}

TEST(Service, IdleSessionsExpire) {
  const auto dir = temp_dir();
  ServiceOptions opts;
  opts.archive_dir = dir;
  SessionService service(opts);
  const std::string id = service.create_session({})["id"];
  EXPECT_EQ(service.expire_idle(SessionService::Clock::now()), 0u);
  EXPECT_EQ(service.expire_idle(SessionService::Clock::now() + std::chrono::minutes(31)), 1u);
  EXPECT_EQ(service.session_count(), 0u);
  try {
    service.get_session(id);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownSession);
  }
  std::ifstream index(dir / "index.jsonl");
  std::string line;
  std::getline(index, line);
  EXPECT_EQ(json::parse(line)["event"], "expired");
  fs::remove_all(dir);
}

TEST(Service, WaitEventsWakesOnNewEvents) {
  ServiceOptions opts;
  opts.feedback_duration_ms = 0.0;
  SessionService service(opts);
  const std::string id = service.create_session({})["id"];
  const auto seen = service.events_since(id, 0).events.size();
  std::thread t([&] {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    service.submit_choice(id, ObjectKind::Drink);
  });
  const auto start = std::chrono::steady_clock::now();
  const auto batch = service.wait_events(id, seen, std::chrono::seconds(5));
  t.join();
  EXPECT_FALSE(batch.events.empty());
  EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds(4));
}

TEST(Service, HttpStatusMapping) {
  EXPECT_EQ(http_status(ErrorCode::UnknownSession), 404);
  EXPECT_EQ(http_status(ErrorCode::WrongPhase), 409);
  EXPECT_EQ(http_status(ErrorCode::DuplicateSurvey), 409);
  EXPECT_EQ(http_status(ErrorCode::NotTerminated), 409);
  EXPECT_EQ(http_status(ErrorCode::InvalidConfig), 400);
  EXPECT_EQ(http_status(ErrorCode::RangeViolation), 400);
}
