#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace crossim {

// Signal actions. Lanes 1/3 and 2/4 are the two compatible pairs; AllRed is
// disabled by default and only enters the action space when explicitly
// configured.
enum class ActionId : std::uint8_t { OpenPair13 = 0, OpenPair24 = 1, AllRed = 2 };

inline bool lane_green(ActionId a, int lane1) {
  switch (a) {
    case ActionId::OpenPair13: return lane1 == 1 || lane1 == 3;
    case ActionId::OpenPair24: return lane1 == 2 || lane1 == 4;
    default: return false;
  }
}

inline const char* to_string(ActionId a) {
  switch (a) {
    case ActionId::OpenPair13: return "OpenPair13";
    case ActionId::OpenPair24: return "OpenPair24";
    default: return "AllRed";
  }
}

inline ActionId action_from_string(const std::string& s) {
  if (s == "OpenPair13") return ActionId::OpenPair13;
  if (s == "OpenPair24") return ActionId::OpenPair24;
  if (s == "AllRed") return ActionId::AllRed;
  throw std::invalid_argument("unknown action: " + s);
}

}  // namespace crossim
