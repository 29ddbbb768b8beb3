#include "babble/needs.hpp"

namespace babble {

std::string_view to_string(NeedKind need) {
  switch (need) {
    case NeedKind::Hunger: return "hunger";
    case NeedKind::Thirst: return "thirst";
    case NeedKind::Curiosity: return "curiosity";
  }
  return "?";
}

std::string_view to_string(ObjectKind object) {
  switch (object) {
    case ObjectKind::Cookie: return "cookie";
    case ObjectKind::Drink: return "drink";
    case ObjectKind::TeddyBear: return "teddy_bear";
  }
  return "?";
}

std::optional<NeedKind> parse_need(std::string_view text) {
  for (NeedKind need : kAllNeeds) {
    if (to_string(need) == text) return need;
  }
  return std::nullopt;
}

std::optional<ObjectKind> parse_object(std::string_view text) {
  for (ObjectKind object : kAllObjects) {
    if (to_string(object) == text) return object;
  }
  return std::nullopt;
}

}  // namespace babble
