#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace babble {

enum class NeedKind : std::uint8_t { Hunger = 0, Thirst = 1, Curiosity = 2 };
enum class ObjectKind : std::uint8_t { Cookie = 0, Drink = 1, TeddyBear = 2 };

inline constexpr std::size_t kNeedCount = 3;

inline constexpr std::array<NeedKind, kNeedCount> kAllNeeds{NeedKind::Hunger, NeedKind::Thirst,
                                                           NeedKind::Curiosity};
inline constexpr std::array<ObjectKind, kNeedCount> kAllObjects{
    ObjectKind::Cookie, ObjectKind::Drink, ObjectKind::TeddyBear};

// Per-need storage indexed by NeedKind.
template <class T>
using PerNeed = std::array<T, kNeedCount>;

constexpr std::size_t index_of(NeedKind need) { return static_cast<std::size_t>(need); }
constexpr std::size_t index_of(ObjectKind object) { return static_cast<std::size_t>(object); }

// Cookie -> Hunger, Drink -> Thirst, TeddyBear -> Curiosity.
constexpr NeedKind satisfies(ObjectKind object) {
  return static_cast<NeedKind>(static_cast<std::uint8_t>(object));
}
constexpr ObjectKind object_for(NeedKind need) {
  return static_cast<ObjectKind>(static_cast<std::uint8_t>(need));
}

std::string_view to_string(NeedKind need);
std::string_view to_string(ObjectKind object);
std::optional<NeedKind> parse_need(std::string_view text);
std::optional<ObjectKind> parse_object(std::string_view text);

}  // namespace babble
