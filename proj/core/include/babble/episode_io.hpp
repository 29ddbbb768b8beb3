#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "babble/session.hpp"

namespace babble {

using ordered_json = nlohmann::ordered_json;

inline constexpr std::string_view kEpisodeFormat = "babble.episode/1";

ordered_json config_to_json(const SessionConfig& config);

/// Applies the keys present in `overrides` on top of `base`. Unknown keys and
/// wrongly typed values raise Error(ConfigInvalid); the result is validated.
SessionConfig apply_config_overrides(SessionConfig base, const nlohmann::json& overrides);

ordered_json rating_to_json(const SamRating& rating);
SamRating rating_from_json(const nlohmann::json& j);

ordered_json episode_to_json(const EpisodeLog& log);

/// Stable text form: two-space indented JSON plus a trailing newline.
std::string serialize_episode(const EpisodeLog& log);

/// Parses and checks the schema. `source` names the file in error messages;
/// failures raise Error(CorruptLog) naming the field.
EpisodeLog parse_episode(std::string_view text, std::string_view source);

/// Cross-checks the log against its own rules: rewards follow the
/// object/need pairing, feedback matches reward and condition, MAR and
/// convergence fields match a recomputation, and the episode stopped exactly
/// when the termination rule first fired. Raises Error(CorruptLog).
void check_episode(const EpisodeLog& log, std::string_view source);

/// Re-runs a simulated episode from its logged config and compares the
/// serialized result with the original.
bool replays_to_itself(const EpisodeLog& log);

EpisodeLog read_episode_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace babble
