#include <gtest/gtest.h>

#include <filesystem>

#include "babble/episode_io.hpp"
#include "babble/errors.hpp"

using namespace babble;
using json = nlohmann::json;

namespace {

SessionConfig with(CaregiverKind kind, std::uint64_t seed) {
  SessionConfig c;
  c.caregiver = CaregiverConfig{kind, {}};
  c.seed = seed;
  return c;
}

std::string corrupt_error(const std::string& text) {
  try {
    check_episode(parse_episode(text, "ep.json"), "ep.json");
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CorruptLog);
    return e.what();
  }
  ADD_FAILURE() << "log accepted";
  return {};
}

std::string tweak(const EpisodeLog& log, const std::function<void(json&)>& edit) {
  json j = json::parse(serialize_episode(log));
  edit(j);
  return j.dump(2);
}

}  // namespace

TEST(EpisodeIo, RoundTripIsExact) {
  std::vector<SessionConfig> configs;
  for (CaregiverKind kind : {CaregiverKind::Oracle, CaregiverKind::Random, CaregiverKind::Associative})
    for (std::uint64_t seed = 0; seed < 10; ++seed) configs.push_back(with(kind, seed));
  SessionConfig in_loop = with(CaregiverKind::Associative, 3);
  in_loop.perception.in_loop = true;
  in_loop.condition = FeedbackCondition::NonDOT;
  in_loop.nondot_fixed_shuffle = true;
  configs.push_back(in_loop);
  SessionConfig soft = with(CaregiverKind::Associative, 4);
  soft.policy.kind = PolicyConfig::Kind::Softmax;
  configs.push_back(soft);

  for (const auto& c : configs) {
    const auto log = run_episode(c);
    const std::string text = serialize_episode(log);
    const auto parsed = parse_episode(text, "x");
    EXPECT_EQ(serialize_episode(parsed), text);
    EXPECT_NO_THROW(check_episode(parsed, "x"));
    EXPECT_TRUE(replays_to_itself(parsed));
  }
}

TEST(EpisodeIo, SurveyAndLatencyRoundTrip) {
  auto log = run_episode(with(CaregiverKind::Oracle, 1));
  log.survey = SamRating{3, 2, 4, {{"natural", 5}, {"clear", 1}}};
  log.trials[0].latency_ms = 1234.5;
  log.config.caregiver.reset();
  log.caregiver_state.reset();
  const auto parsed = parse_episode(serialize_episode(log), "live");
  EXPECT_EQ(parsed.survey, log.survey);
  EXPECT_EQ(parsed.trials[0].latency_ms, 1234.5);
  EXPECT_FALSE(parsed.config.caregiver.has_value());
  EXPECT_NO_THROW(check_episode(parsed, "live"));
  EXPECT_FALSE(replays_to_itself(parsed));
}

TEST(EpisodeIo, StableFieldNames) {
  const auto j = json::parse(serialize_episode(run_episode(with(CaregiverKind::Associative, 2))));
  for (const char* key : {"format", "config", "trials", "converged", "convergence_time", "final_q", "perception",
                          "caregiver_state", "survey"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j["format"], std::string(kEpisodeFormat));
  for (const char* key : {"n", "expressed_need", "word", "offered_object", "reward", "feedback", "mar",
                          "homeostatic_snapshot", "latency_ms"})
    EXPECT_TRUE(j["trials"][0].contains(key)) << key;
}

TEST(EpisodeIo, CorruptRewardNamesField) {
  const auto log = run_episode(with(CaregiverKind::Random, 5));
  const auto msg = corrupt_error(tweak(log, [](json& j) {
    j["trials"][3]["reward"] = -j["trials"][3]["reward"].get<int>();
  }));
  EXPECT_NE(msg.find("ep.json"), std::string::npos);
  EXPECT_NE(msg.find("trials[3].reward"), std::string::npos);
}

TEST(EpisodeIo, CorruptMar) {
  const auto log = run_episode(with(CaregiverKind::Random, 6));
  const auto msg = corrupt_error(tweak(log, [](json& j) { j["trials"][1]["mar"] = 0.123; }));
  EXPECT_NE(msg.find("trials[1].mar"), std::string::npos);
}

TEST(EpisodeIo, WrongDotFeedback) {
  auto log = run_episode(with(CaregiverKind::Oracle, 7));
  const auto msg = corrupt_error(tweak(log, [&](json& j) {
    const std::size_t pair = (*positive_pair_index(log.trials[0].feedback) + 1) % 3;
    j["trials"][0]["feedback"]["motion"] = std::string(to_string(kPositivePairs[pair].motion));
    j["trials"][0]["feedback"]["sound"] = std::string(to_string(kPositivePairs[pair].sound));
  }));
  EXPECT_NE(msg.find("trials[0].feedback"), std::string::npos);
}

TEST(EpisodeIo, TruncatedEpisode) {
  const auto log = run_episode(with(CaregiverKind::Associative, 8));
  const auto msg = corrupt_error(tweak(log, [](json& j) { j["trials"].erase(j["trials"].size() - 1); }));
  EXPECT_FALSE(msg.empty());
}

TEST(EpisodeIo, ConvergedFlag) {
  const auto log = run_episode(with(CaregiverKind::Oracle, 9));
  const auto msg = corrupt_error(tweak(log, [](json& j) { j["converged"] = false; }));
  EXPECT_NE(msg.find("converged"), std::string::npos);
}

TEST(EpisodeIo, SchemaErrors) {
  const auto log = run_episode(with(CaregiverKind::Oracle, 10));
  for (const auto& text : {std::string("not json"), std::string("[]"),
                           tweak(log, [](json& j) { j["format"] = "other/9"; }),
                           tweak(log, [](json& j) { j.erase("trials"); }),
                           tweak(log, [](json& j) { j["trials"][0]["offered_object"] = "banana"; }),
                           tweak(log, [](json& j) { j["final_q"]["values"].erase(0); }),
                           tweak(log, [](json& j) { j["trials"][0]["feedback"]["motion"] = "spin"; })}) {
    try {
      parse_episode(text, "bad.json");
      ADD_FAILURE() << text.substr(0, 60);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::CorruptLog);
      EXPECT_NE(std::string(e.what()).find("bad.json"), std::string::npos);
    }
  }
}

TEST(ConfigOverrides, RoundTripThroughJson) {
  SessionConfig c = with(CaregiverKind::Random, 77);
  c.theta = 0.7;
  c.decay_rate = {0.1, 0.2, 0.05};
  c.policy.kind = PolicyConfig::Kind::Softmax;
  c.perception.in_loop = true;
  c.nondot_fixed_shuffle = true;
  c.condition = FeedbackCondition::NonDOT;
  const auto j = config_to_json(c);
  const auto back = apply_config_overrides(SessionConfig{}, json::parse(j.dump()));
  EXPECT_EQ(config_to_json(back).dump(), j.dump());
}

TEST(ConfigOverrides, Forms) {
  const auto c = apply_config_overrides(
      SessionConfig{}, json{{"decay_rate", 0.2},
                            {"optimal", {{"thirst", 0.9}}},
                            {"perception_in_loop", true},
                            {"caregiver", {{"kind", "associative"}, {"lambda", 0.0}}}});
  EXPECT_EQ(c.decay_rate, (PerNeed<double>{0.2, 0.2, 0.2}));
  EXPECT_EQ(c.optimal, (PerNeed<double>{1.0, 0.9, 1.0}));
  EXPECT_TRUE(c.perception.in_loop);
  EXPECT_EQ(c.caregiver->associative.lambda, 0.0);
  EXPECT_EQ(c.caregiver->associative.retention, 0.9);
  EXPECT_FALSE(apply_config_overrides(SessionConfig{}, json{{"caregiver", nullptr}}).caregiver.has_value());
}

TEST(ConfigOverrides, Rejections) {
  for (const json& bad : {json{{"theta", -1}}, json{{"bogus", 1}}, json{{"theta", "high"}},
                          json{{"optimal", {{"sleep", 0.5}}}}, json{{"min_iterations", 20}},
                          json{{"max_iterations", -3}}, json{{"caregiver", {{"kind", "human"}}}},
                          json{{"policy", {{"kind", "greedy"}}}}, json::array()}) {
    try {
      apply_config_overrides(SessionConfig{}, bad);
      ADD_FAILURE() << bad.dump();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::ConfigInvalid) << bad.dump();
    }
  }
}

TEST(Rating, JsonRoundTrip) {
  const SamRating r{1, 5, 3, {{"q", 2}}};
  EXPECT_EQ(rating_from_json(json::parse(rating_to_json(r).dump())), r);
  EXPECT_THROW(rating_from_json(json{{"valence", 6}, {"arousal", 1}, {"dominance", 1}}), Error);
  EXPECT_THROW(rating_from_json(json{{"valence", 2}}), Error);
}

TEST(Files, MissingFileIsIoFailure) {
  try {
    read_episode_file("/nonexistent/dir/ep.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoFailure);
  }
}
