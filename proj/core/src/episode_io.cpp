#include "babble/episode_io.hpp"

#include <fstream>
#include <sstream>

#include "babble/errors.hpp"
#include "babble/metrics.hpp"

namespace babble {
namespace {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Config overrides

[[noreturn]] void invalid(const std::string& field, const std::string& why) {
  throw Error(ErrorCode::ConfigInvalid, field + ": " + why);
}

double as_number(const json& v, const std::string& field) {
  if (!v.is_number()) invalid(field, "expected a number");
  return v.get<double>();
}

std::size_t as_count(const json& v, const std::string& field) {
  if (!v.is_number_unsigned()) invalid(field, "expected a non-negative integer");
  return v.get<std::size_t>();
}

bool as_bool(const json& v, const std::string& field) {
  if (!v.is_boolean()) invalid(field, "expected true or false");
  return v.get<bool>();
}

std::string as_string(const json& v, const std::string& field) {
  if (!v.is_string()) invalid(field, "expected a string");
  return v.get<std::string>();
}

void read_per_need(PerNeed<double>& target, const json& v, const std::string& field) {
  if (v.is_number()) {
    target.fill(v.get<double>());
    return;
  }
  if (!v.is_object()) invalid(field, "expected a number or an object keyed by need");
  for (const auto& [key, value] : v.items()) {
    const auto need = parse_need(key);
    if (!need) invalid(field + "." + key, "unknown need");
    target[index_of(*need)] = as_number(value, field + "." + key);
  }
}

ordered_json per_need_json(const PerNeed<double>& values) {
  ordered_json j = ordered_json::object();
  for (NeedKind need : kAllNeeds) j[std::string(to_string(need))] = values[index_of(need)];
  return j;
}

void apply_policy(PolicyConfig& p, const json& j) {
  if (!j.is_object()) invalid("policy", "expected an object");
  for (const auto& [key, v] : j.items()) {
    const std::string field = "policy." + key;
    if (key == "kind") {
      const auto kind = as_string(v, field);
      if (kind == "epsilon_greedy") {
        p.kind = PolicyConfig::Kind::EpsilonGreedy;
      } else if (kind == "softmax") {
        p.kind = PolicyConfig::Kind::Softmax;
      } else {
        invalid(field, "expected epsilon_greedy or softmax");
      }
    } else if (key == "epsilon_start") {
      p.epsilon.start = as_number(v, field);
    } else if (key == "epsilon_end") {
      p.epsilon.end = as_number(v, field);
    } else if (key == "epsilon_decay_expressions") {
      p.epsilon.span = as_count(v, field);
    } else if (key == "temperature") {
      p.temperature = as_number(v, field);
    } else {
      invalid(field, "unknown field");
    }
  }
}

void apply_caregiver(std::optional<CaregiverConfig>& c, const json& j) {
  if (j.is_null()) {
    c.reset();
    return;
  }
  if (!j.is_object()) invalid("caregiver", "expected an object or null");
  if (!c) c = CaregiverConfig{};
  auto& a = c->associative;
  for (const auto& [key, v] : j.items()) {
    const std::string field = "caregiver." + key;
    if (key == "kind") {
      const auto kind = parse_caregiver_kind(as_string(v, field));
      if (!kind) invalid(field, "expected oracle, random or associative");
      c->kind = *kind;
    } else if (key == "alpha_a") {
      a.alpha_a = as_number(v, field);
    } else if (key == "alpha_e") {
      a.alpha_e = as_number(v, field);
    } else if (key == "alpha_o") {
      a.alpha_o = as_number(v, field);
    } else if (key == "lambda") {
      a.lambda = as_number(v, field);
    } else if (key == "tau") {
      a.tau = as_number(v, field);
    } else if (key == "retention") {
      a.retention = as_number(v, field);
    } else {
      invalid(field, "unknown field");
    }
  }
}

void apply_perception(PerceptionConfig& p, const json& j) {
  if (!j.is_object()) invalid("perception", "expected an object");
  for (const auto& [key, v] : j.items()) {
    const std::string field = "perception." + key;
    if (key == "feature_dim") {
      p.feature_dim = as_count(v, field);
    } else if (key == "noise_sigma") {
      p.noise_sigma = as_number(v, field);
    } else if (key == "som_rows") {
      p.som_rows = as_count(v, field);
    } else if (key == "som_cols") {
      p.som_cols = as_count(v, field);
    } else if (key == "som_learning_rate_start") {
      p.som_learning_rate_start = as_number(v, field);
    } else if (key == "som_learning_rate_end") {
      p.som_learning_rate_end = as_number(v, field);
    } else if (key == "som_radius_end") {
      p.som_radius_end = as_number(v, field);
    } else if (key == "som_decay_steps") {
      p.som_decay_steps = as_count(v, field);
    } else if (key == "perceptron_epsilon") {
      p.perceptron_epsilon = as_number(v, field);
    } else if (key == "in_loop") {
      p.in_loop = as_bool(v, field);
    } else {
      invalid(field, "unknown field");
    }
  }
}

// ---------------------------------------------------------------------------
// Log reading with field paths

class Reader {
 public:
  Reader(const json& node, std::string path, std::string_view source)
      : node_(node), path_(std::move(path)), source_(source) {}

  [[noreturn]] void fail(const std::string& field, const std::string& why) const {
    throw Error(ErrorCode::CorruptLog, std::string(source_) + ": field '" + field + "' " + why);
  }

  std::string field(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

  const json& at(std::string_view key) const {
    if (!node_.is_object()) fail(path_, "is not an object");
    auto it = node_.find(key);
    if (it == node_.end()) fail(field(key), "is missing");
    return *it;
  }

  bool has(std::string_view key) const { return node_.is_object() && node_.contains(key); }

  Reader object(std::string_view key) const {
    const json& v = at(key);
    if (!v.is_object()) fail(field(key), "must be an object");
    return Reader(v, field(key), source_);
  }

  double number(std::string_view key) const {
    const json& v = at(key);
    if (!v.is_number()) fail(field(key), "must be a number");
    return v.get<double>();
  }

  long integer(std::string_view key) const {
    const json& v = at(key);
    if (!v.is_number_integer()) fail(field(key), "must be an integer");
    return v.get<long>();
  }

  std::size_t count(std::string_view key) const {
    const json& v = at(key);
    if (!v.is_number_unsigned()) fail(field(key), "must be a non-negative integer");
    return v.get<std::size_t>();
  }

  bool boolean(std::string_view key) const {
    const json& v = at(key);
    if (!v.is_boolean()) fail(field(key), "must be a boolean");
    return v.get<bool>();
  }

  std::string string(std::string_view key) const {
    const json& v = at(key);
    if (!v.is_string()) fail(field(key), "must be a string");
    return v.get<std::string>();
  }

  const json& array(std::string_view key) const {
    const json& v = at(key);
    if (!v.is_array()) fail(field(key), "must be an array");
    return v;
  }

  std::vector<double> numbers(std::string_view key, std::size_t expected) const {
    const json& v = array(key);
    if (v.size() != expected) {
      fail(field(key), "must hold " + std::to_string(expected) + " values, found " +
                           std::to_string(v.size()));
    }
    std::vector<double> out;
    out.reserve(expected);
    for (const auto& x : v) {
      if (!x.is_number()) fail(field(key), "must hold numbers only");
      out.push_back(x.get<double>());
    }
    return out;
  }

  std::vector<std::size_t> shape(std::string_view key, std::vector<std::size_t> expected) const {
    const json& v = array(key);
    std::vector<std::size_t> got;
    for (const auto& x : v) {
      if (!x.is_number_unsigned()) fail(field(key), "must hold non-negative integers");
      got.push_back(x.get<std::size_t>());
    }
    if (got != expected) fail(field(key), "does not match the configured shape");
    return got;
  }

  PerNeed<double> per_need(std::string_view key) const {
    Reader r = object(key);
    PerNeed<double> out{};
    for (NeedKind need : kAllNeeds) out[index_of(need)] = r.number(to_string(need));
    return out;
  }

  const json& node() const { return node_; }
  const std::string& path() const { return path_; }
  std::string_view source() const { return source_; }

 private:
  const json& node_;
  std::string path_;
  std::string_view source_;
};

template <class T, class Parse>
T parse_token(const Reader& r, std::string_view key, Parse parse) {
  const auto text = r.string(key);
  const auto value = parse(text);
  if (!value) r.fail(r.field(key), "has unknown value '" + text + "'");
  return *value;
}

ordered_json feedback_json(const FeedbackSignal& f) {
  return ordered_json{{"valence", to_string(f.valence)},
                      {"motion", to_string(f.motion)},
                      {"sound", to_string(f.sound)}};
}

ordered_json trial_json(const TrialRecord& t) {
  ordered_json j;
  j["n"] = t.n;
  j["expressed_need"] = to_string(t.expressed_need);
  j["word"] = t.word;
  j["offered_object"] = to_string(t.offered_object);
  j["recognized_object"] =
      t.recognized_object ? ordered_json(to_string(*t.recognized_object)) : ordered_json(nullptr);
  j["reward"] = t.reward;
  j["feedback"] = feedback_json(t.feedback);
  j["mar"] = t.mar;
  j["homeostatic_snapshot"] = per_need_json(t.homeostatic_snapshot);
  j["latency_ms"] = t.latency_ms ? ordered_json(*t.latency_ms) : ordered_json(nullptr);
  return j;
}

TrialRecord read_trial(const Reader& r) {
  TrialRecord t;
  t.n = r.count("n");
  t.expressed_need = parse_token<NeedKind>(r, "expressed_need", parse_need);
  t.word = r.string("word");
  t.offered_object = parse_token<ObjectKind>(r, "offered_object", parse_object);
  if (!r.at("recognized_object").is_null()) {
    t.recognized_object = parse_token<ObjectKind>(r, "recognized_object", parse_object);
  }
  t.reward = static_cast<int>(r.integer("reward"));
  const Reader f = r.object("feedback");
  t.feedback.valence = parse_token<Valence>(f, "valence", parse_valence);
  t.feedback.motion = parse_token<MotionToken>(f, "motion", parse_motion);
  t.feedback.sound = parse_token<SoundToken>(f, "sound", parse_sound);
  t.mar = r.number("mar");
  t.homeostatic_snapshot = r.per_need("homeostatic_snapshot");
  if (!r.at("latency_ms").is_null()) t.latency_ms = r.number("latency_ms");
  return t;
}

ordered_json strengths_json(const std::map<std::string, std::array<double, 3>>& rows) {
  ordered_json j = ordered_json::object();
  for (const auto& [word, row] : rows) j[word] = row;
  return j;
}

std::map<std::string, std::array<double, 3>> read_strengths(const Reader& r, std::string_view key) {
  const Reader rows = r.object(key);
  std::map<std::string, std::array<double, 3>> out;
  for (const auto& [word, _] : rows.node().items()) {
    const auto values = rows.numbers(word, 3);
    out[word] = {values[0], values[1], values[2]};
  }
  return out;
}

}  // namespace

ordered_json config_to_json(const SessionConfig& c) {
  ordered_json j;
  j["condition"] = to_string(c.condition);
  j["seed"] = c.seed;
  j["theta"] = c.theta;
  j["initial_level"] = per_need_json(c.initial_level);
  j["optimal"] = per_need_json(c.optimal);
  j["decay_rate"] = per_need_json(c.decay_rate);
  j["satiation_gain"] = per_need_json(c.satiation_gain);
  j["syllables"] = c.syllables;
  j["vocabulary_size"] = c.vocabulary_size;
  j["alpha"] = c.alpha;
  j["policy"] = ordered_json{
      {"kind", c.policy.kind == PolicyConfig::Kind::Softmax ? "softmax" : "epsilon_greedy"},
      {"epsilon_start", c.policy.epsilon.start},
      {"epsilon_end", c.policy.epsilon.end},
      {"epsilon_decay_expressions", c.policy.epsilon.span},
      {"temperature", c.policy.temperature}};
  if (c.caregiver) {
    const auto& a = c.caregiver->associative;
    j["caregiver"] = ordered_json{{"kind", to_string(c.caregiver->kind)},
                                  {"alpha_a", a.alpha_a},
                                  {"alpha_e", a.alpha_e},
                                  {"alpha_o", a.alpha_o},
                                  {"lambda", a.lambda},
                                  {"tau", a.tau},
                                  {"retention", a.retention}};
  } else {
    j["caregiver"] = nullptr;
  }
  j["min_iterations"] = c.min_iterations;
  j["max_iterations"] = c.max_iterations;
  j["convergence_mar_threshold"] = c.convergence_mar_threshold;
  j["mar_window"] = c.mar_window;
  const auto& p = c.perception;
  j["perception"] = ordered_json{{"feature_dim", p.feature_dim},
                                 {"noise_sigma", p.noise_sigma},
                                 {"som_rows", p.som_rows},
                                 {"som_cols", p.som_cols},
                                 {"som_learning_rate_start", p.som_learning_rate_start},
                                 {"som_learning_rate_end", p.som_learning_rate_end},
                                 {"som_radius_end", p.som_radius_end},
                                 {"som_decay_steps", p.som_decay_steps},
                                 {"perceptron_epsilon", p.perceptron_epsilon},
                                 {"in_loop", p.in_loop}};
  j["nondot_fixed_shuffle"] = c.nondot_fixed_shuffle;
  return j;
}

SessionConfig apply_config_overrides(SessionConfig c, const json& j) {
  if (j.is_null()) {
    validate(c);
    return c;
  }
  if (!j.is_object()) invalid("config", "expected an object");
  for (const auto& [key, v] : j.items()) {
    if (key == "condition") {
      const auto cond = parse_condition(as_string(v, key));
      if (!cond) invalid(key, "expected dot or nondot");
      c.condition = *cond;
    } else if (key == "seed") {
      if (!v.is_number_unsigned()) invalid(key, "expected a non-negative integer");
      c.seed = v.get<std::uint64_t>();
    } else if (key == "theta") {
      c.theta = as_number(v, key);
    } else if (key == "initial_level") {
      read_per_need(c.initial_level, v, key);
    } else if (key == "optimal") {
      read_per_need(c.optimal, v, key);
    } else if (key == "decay_rate") {
      read_per_need(c.decay_rate, v, key);
    } else if (key == "satiation_gain") {
      read_per_need(c.satiation_gain, v, key);
    } else if (key == "syllables") {
      if (!v.is_array()) invalid(key, "expected an array of strings");
      c.syllables.clear();
      for (const auto& s : v) c.syllables.push_back(as_string(s, key));
    } else if (key == "vocabulary_size") {
      c.vocabulary_size = as_count(v, key);
    } else if (key == "alpha") {
      c.alpha = as_number(v, key);
    } else if (key == "policy") {
      apply_policy(c.policy, v);
    } else if (key == "caregiver") {
      apply_caregiver(c.caregiver, v);
    } else if (key == "min_iterations") {
      c.min_iterations = as_count(v, key);
    } else if (key == "max_iterations") {
      c.max_iterations = as_count(v, key);
    } else if (key == "convergence_mar_threshold") {
      c.convergence_mar_threshold = as_number(v, key);
    } else if (key == "mar_window") {
      c.mar_window = as_count(v, key);
    } else if (key == "perception") {
      apply_perception(c.perception, v);
    } else if (key == "perception_in_loop") {
      c.perception.in_loop = as_bool(v, key);
    } else if (key == "nondot_fixed_shuffle") {
      c.nondot_fixed_shuffle = as_bool(v, key);
    } else {
      invalid(key, "unknown field");
    }
  }
  validate(c);
  return c;
}

ordered_json rating_to_json(const SamRating& r) {
  ordered_json likert = ordered_json::array();
  for (const auto& [id, v] : r.likert_answers) likert.push_back({{"id", id}, {"value", v}});
  return ordered_json{{"valence", r.valence},
                      {"arousal", r.arousal},
                      {"dominance", r.dominance},
                      {"likert_answers", likert}};
}

SamRating rating_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::RangeViolation, "survey must be an object");
  auto rating = [&](const char* key) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_number_integer()) {
      throw Error(ErrorCode::RangeViolation, std::string(key) + " must be an integer 1..5");
    }
    return it->get<int>();
  };
  SamRating r{rating("valence"), rating("arousal"), rating("dominance"), {}};
  if (auto it = j.find("likert_answers"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) throw Error(ErrorCode::RangeViolation, "likert_answers must be an array");
    for (const auto& item : *it) {
      if (!item.is_object() || !item.contains("id") || !item["id"].is_string() ||
          !item.contains("value") || !item["value"].is_number_integer()) {
        throw Error(ErrorCode::RangeViolation, "likert answers need a string id and integer value");
      }
      r.likert_answers.emplace_back(item["id"].get<std::string>(), item["value"].get<int>());
    }
  }
  validate(r);
  return r;
}

ordered_json episode_to_json(const EpisodeLog& log) {
  ordered_json j;
  j["format"] = kEpisodeFormat;
  j["config"] = config_to_json(log.config);
  ordered_json trials = ordered_json::array();
  for (const auto& t : log.trials) trials.push_back(trial_json(t));
  j["trials"] = std::move(trials);
  j["converged"] = log.converged;
  j["convergence_time"] =
      log.convergence_time ? ordered_json(*log.convergence_time) : ordered_json(nullptr);

  const auto& vocab = log.final_q.vocabulary();
  ordered_json words = ordered_json::array();
  for (const auto& w : vocab.words) words.push_back(w.text());
  ordered_json needs = ordered_json::array();
  for (NeedKind need : kAllNeeds) needs.push_back(to_string(need));
  j["final_q"] = ordered_json{{"needs", needs},
                              {"words", words},
                              {"alpha", log.final_q.alpha()},
                              {"shape", {kNeedCount, vocab.size()}},
                              {"values", log.final_q.table()},
                              {"counts", log.final_q.counts()}};

  std::vector<std::uint32_t> votes;
  for (const auto& node : log.som.label_counts) votes.insert(votes.end(), node.begin(), node.end());
  j["perception"] = ordered_json{
      {"som",
       {{"shape", {log.som.config.rows, log.som.config.cols, log.som.config.dim}},
        {"learning_rate", log.som.learning_rate},
        {"radius", log.som.radius},
        {"epoch", log.som.epoch},
        {"weights", log.som.weights},
        {"label_counts", {{"shape", {log.som.node_count(), kNeedCount}}, {"values", votes}}}}},
      {"perceptron",
       {{"epsilon", log.perceptron.epsilon},
        {"shape", {log.perceptron.dim, kNeedCount}},
        {"omega", log.perceptron.omega}}}};

  if (log.caregiver_state) {
    const auto& s = *log.caregiver_state;
    std::vector<double> outcome;
    for (const auto& row : s.outcome) outcome.insert(outcome.end(), row.begin(), row.end());
    j["caregiver_state"] =
        ordered_json{{"direct", strengths_json(s.direct)},
                     {"expectancy", strengths_json(s.expectancy)},
                     {"outcome", {{"shape", {kPositivePairCount, kNeedCount}}, {"values", outcome}}}};
  } else {
    j["caregiver_state"] = nullptr;
  }
  j["survey"] = log.survey ? rating_to_json(*log.survey) : ordered_json(nullptr);
  return j;
}

std::string serialize_episode(const EpisodeLog& log) { return episode_to_json(log).dump(2) + "\n"; }

EpisodeLog parse_episode(std::string_view text, std::string_view source) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::CorruptLog, std::string(source) + ": not valid JSON (" + e.what() + ")");
  }
  const Reader r(root, "", source);
  if (r.string("format") != kEpisodeFormat) r.fail("format", "is not " + std::string(kEpisodeFormat));

  SessionConfig config;
  try {
    config = apply_config_overrides(SessionConfig{}, r.object("config").node());
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ConfigInvalid) throw;
    r.fail("config", std::string("is invalid (") + e.what() + ")");
  }

  std::vector<TrialRecord> trials;
  const json& trial_nodes = r.array("trials");
  for (std::size_t i = 0; i < trial_nodes.size(); ++i) {
    const std::string path = "trials[" + std::to_string(i) + "]";
    if (!trial_nodes[i].is_object()) r.fail(path, "must be an object");
    trials.push_back(read_trial(Reader(trial_nodes[i], path, source)));
  }

  const Reader q = r.object("final_q");
  Vocabulary vocab;
  vocab.syllable_set = config.syllables;
  for (const auto& w : q.array("words")) {
    if (!w.is_string()) q.fail(q.field("words"), "must hold strings");
    const auto text = w.get<std::string>();
    // Recover the syllable split from the configured syllable set.
    bool found = false;
    for (const auto& a : config.syllables) {
      if (text.rfind(a, 0) == 0 && text.size() > a.size()) {
        const auto rest = text.substr(a.size());
        if (std::find(config.syllables.begin(), config.syllables.end(), rest) !=
            config.syllables.end()) {
          vocab.words.emplace_back(a, rest);
          found = true;
          break;
        }
      }
    }
    if (!found) q.fail(q.field("words"), "contains '" + text + "' which is not a syllable pair");
  }
  const std::size_t slots = kNeedCount * vocab.size();
  q.shape("shape", {kNeedCount, vocab.size()});
  const auto values = q.numbers("values", slots);
  std::vector<std::uint32_t> counts;
  for (double c : q.numbers("counts", slots)) {
    if (c < 0 || c != static_cast<double>(static_cast<std::uint32_t>(c))) {
      q.fail(q.field("counts"), "must hold non-negative integers");
    }
    counts.push_back(static_cast<std::uint32_t>(c));
  }
  const double alpha = q.number("alpha");
  if (!(alpha > 0.0 && alpha <= 1.0)) q.fail(q.field("alpha"), "must lie in (0, 1]");

  const Reader perception = r.object("perception");
  const Reader som = perception.object("som");
  const SomConfig som_cfg = config.perception.som_config();
  som.shape("shape", {som_cfg.rows, som_cfg.cols, som_cfg.dim});
  SomGrid grid = make_som(som_cfg, som.numbers("weights", som_cfg.rows * som_cfg.cols * som_cfg.dim));
  grid.learning_rate = som.number("learning_rate");
  grid.radius = som.number("radius");
  grid.epoch = som.count("epoch");
  const Reader labels = som.object("label_counts");
  labels.shape("shape", {grid.node_count(), kNeedCount});
  const auto votes = labels.numbers("values", grid.node_count() * kNeedCount);
  for (std::size_t n = 0; n < grid.node_count(); ++n) {
    for (std::size_t k = 0; k < kNeedCount; ++k) {
      grid.label_counts[n][k] = static_cast<std::uint32_t>(votes[n * kNeedCount + k]);
    }
  }
  const Reader pr = perception.object("perceptron");
  pr.shape("shape", {config.perception.feature_dim, kNeedCount});
  NeedPerceptron perceptron{config.perception.feature_dim,
                            pr.numbers("omega", config.perception.feature_dim * kNeedCount),
                            pr.number("epsilon")};

  std::optional<AssociativeState> caregiver_state;
  if (!r.at("caregiver_state").is_null()) {
    const Reader cs = r.object("caregiver_state");
    AssociativeState s;
    if (config.caregiver) s.params = config.caregiver->associative;
    s.direct = read_strengths(cs, "direct");
    s.expectancy = read_strengths(cs, "expectancy");
    const Reader outcome = cs.object("outcome");
    outcome.shape("shape", {kPositivePairCount, kNeedCount});
    const auto o = outcome.numbers("values", kPositivePairCount * kNeedCount);
    for (std::size_t f = 0; f < kPositivePairCount; ++f) {
      for (std::size_t k = 0; k < kNeedCount; ++k) s.outcome[f][k] = o[f * kNeedCount + k];
    }
    caregiver_state = std::move(s);
  }

  std::optional<SamRating> survey;
  if (!r.at("survey").is_null()) {
    try {
      survey = rating_from_json(r.at("survey"));
    } catch (const Error& e) {
      r.fail("survey", std::string("is invalid (") + e.what() + ")");
    }
  }

  std::optional<std::size_t> conv;
  if (!r.at("convergence_time").is_null()) conv = r.count("convergence_time");

  return EpisodeLog{.config = std::move(config),
                    .trials = std::move(trials),
                    .converged = r.boolean("converged"),
                    .convergence_time = conv,
                    .final_q = WordNeedValues::restore(std::move(vocab), alpha, values, counts),
                    .som = std::move(grid),
                    .perceptron = std::move(perceptron),
                    .caregiver_state = std::move(caregiver_state),
                    .survey = std::move(survey)};
}

void check_episode(const EpisodeLog& log, std::string_view source) {
  auto fail = [&](const std::string& field, const std::string& why) {
    throw Error(ErrorCode::CorruptLog, std::string(source) + ": field '" + field + "' " + why);
  };
  const auto& cfg = log.config;
  const std::size_t total = log.trials.size();
  if (total < 1 || total > cfg.max_iterations) {
    fail("trials", "holds " + std::to_string(total) + " trials, expected 1.." +
                       std::to_string(cfg.max_iterations));
  }

  std::vector<int> rewards;
  for (std::size_t i = 0; i < total; ++i) {
    const auto& t = log.trials[i];
    const std::string at = "trials[" + std::to_string(i) + "]";
    if (t.n != i + 1) fail(at + ".n", "is out of sequence");
    if (!log.final_q.vocabulary().find(t.word)) fail(at + ".word", "is not in the vocabulary");
    if (cfg.perception.in_loop != t.recognized_object.has_value()) {
      fail(at + ".recognized_object", "presence does not match perception_in_loop");
    }
    const ObjectKind judged = t.recognized_object.value_or(t.offered_object);
    const int expected = satisfies(judged) == t.expressed_need ? 1 : -1;
    if (t.reward != expected) {
      fail(at + ".reward", "is " + std::to_string(t.reward) + " but the object/need pairing gives " +
                               std::to_string(expected));
    }
    if (t.reward > 0) {
      const auto pair = positive_pair_index(t.feedback);
      if (!pair) fail(at + ".feedback", "is not a positive signal on a rewarded trial");
      if (cfg.condition == FeedbackCondition::DOT &&
          *pair != dot_feedback_map().pair_for_need[index_of(t.expressed_need)]) {
        fail(at + ".feedback", "does not match the need's DOT signal");
      }
    } else if (!(t.feedback == negative_feedback())) {
      fail(at + ".feedback", "is not the negative signal on a penalized trial");
    }
    for (double level : t.homeostatic_snapshot) {
      if (!(level >= 0.0 && level <= 1.0)) fail(at + ".homeostatic_snapshot", "leaves [0, 1]");
    }
    rewards.push_back(t.reward);
    if (t.mar != moving_average_reward(rewards, cfg.mar_window, t.n)) {
      fail(at + ".mar", "does not match the moving average of rewards");
    }
    const bool stop = termination_check(std::span(log.trials).first(i + 1), cfg);
    if (stop && i + 1 < total) fail(at, "meets the termination rule but the episode continued");
    if (!stop && i + 1 == total) fail(at, "is the last trial but the termination rule did not fire");
  }

  const bool converged = total >= cfg.min_iterations &&
                         log.trials.back().mar >= cfg.convergence_mar_threshold;
  if (log.converged != converged) fail("converged", "disagrees with the final MAR");
  if (log.convergence_time !=
      convergence_time(rewards, cfg.mar_window, cfg.convergence_mar_threshold)) {
    fail("convergence_time", "disagrees with the reward series");
  }
  if (log.survey) {
    try {
      validate(*log.survey);
    } catch (const Error& e) {
      fail("survey", e.what());
    }
  }
}

bool replays_to_itself(const EpisodeLog& log) {
  if (!log.config.caregiver) return false;
  EpisodeLog rerun = run_episode(log.config);
  rerun.survey = log.survey;
  return serialize_episode(rerun) == serialize_episode(log);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::IoFailure, "short write to " + path.string());
}

EpisodeLog read_episode_file(const std::filesystem::path& path) {
  return parse_episode(read_text_file(path), path.filename().string());
}

}  // namespace babble
