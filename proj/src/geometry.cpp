#include "crossim/geometry.hpp"

#include <cmath>

namespace crossim {

namespace {

bool near_integer_multiple(double value, double base) {
  if (base <= 0.0) return false;
  const double ratio = value / base;
  return std::abs(ratio - std::round(ratio)) < 1e-9;
}

}  // namespace

void IntersectionConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw ConfigError(field + ": " + why);
  };

  if (n_lanes != 4) fail("n_lanes", "must be 4 (paired-lane signal plan)");
  if (L_M <= 0) fail("L_M", "must be positive");
  if (L_C <= 0) fail("L_C", "must be positive");
  if (L_E <= 0) fail("L_E", "must be positive");
  if (v_max <= 0) fail("v_max", "must be positive");
  if (N_max <= 0) fail("N_max", "must be positive");
  if (T_S <= 0) fail("T_S", "must be positive");
  if (T_RL <= 0) fail("T_RL", "must be positive");
  if (!near_integer_multiple(T_RL, T_S) || steps_per_block() < 1)
    fail("T_RL", "must equal n * T_S for an integer n >= 1");
  if (T_alert < 0) fail("T_alert", "must be nonnegative");
  if (!near_integer_multiple(T_alert, T_S))
    fail("T_alert", "must equal m * T_S for an integer m");
  if (amber_steps() >= steps_per_block())
    fail("T_alert", "must be shorter than T_RL");
  if (d_a < 1) fail("d_a", "must be at least 1");
  if (d_follow <= 0) fail("d_follow", "must be positive");
  if (d_follow >= L_C) fail("d_follow", "must be smaller than L_C");
  if (delta_a <= 0) fail("delta_a", "must be positive");
  if (delta_a >= L_C) fail("delta_a", "must be smaller than L_C");
  if (s0 <= 0) fail("s0", "must be positive");
  if (T_headway <= 0) fail("T_headway", "must be positive");
  if (epsilon_idm <= 0) fail("epsilon_idm", "must be positive");
  if (u_max <= 0) fail("u_max", "must be positive");
  if (u_min <= 0) fail("u_min", "must be positive");
  if (u_min_hard < u_min) fail("u_min_hard", "must be at least u_min");
  if (lambda_arrival < 0) fail("lambda_arrival", "must be nonnegative");
  if (d_sense <= d_follow) fail("d_sense", "must exceed d_follow");

  if (static_cast<int>(W.size()) != n_lanes)
    fail("W", "needs one weight per lane");
  for (double w : W)
    if (w < 0 || !std::isfinite(w)) fail("W", "weights must be finite and nonnegative");

  if (non_conflicting_pairs.empty())
    fail("non_conflicting_pairs", "must list the compatible lane pairs");
  for (const auto& [a, b] : non_conflicting_pairs) {
    if (a < 1 || a > n_lanes || b < 1 || b > n_lanes)
      fail("non_conflicting_pairs", "lane index out of range");
    if (a == b) fail("non_conflicting_pairs", "a pair needs two distinct lanes");
  }
}

double free_flow_merge_time(double t_entry, const IntersectionConfig& cfg) {
  return t_entry + cfg.L_C / cfg.v_max;
}

double free_flow_exit_time(double t_entry, const IntersectionConfig& cfg) {
  return t_entry + (cfg.L_C + cfg.L_M) / cfg.v_max;
}

Zone zone_of(double position, const IntersectionConfig& cfg) {
  if (position < 0 || !std::isfinite(position))
    throw std::invalid_argument("zone_of: position must be finite and nonnegative");
  if (position < cfg.L_C) return Zone::CZ;
  if (position < cfg.L_C + cfg.L_M) return Zone::MZ;
  if (position < cfg.total_length()) return Zone::EZ;
  return Zone::Exited;
}

bool are_conflicting(int j, int l, const IntersectionConfig& cfg) {
  if (j < 1 || j > cfg.n_lanes || l < 1 || l > cfg.n_lanes)
    throw std::invalid_argument("are_conflicting: lane index out of range");
  if (j == l) return false;
  for (const auto& [a, b] : cfg.non_conflicting_pairs)
    if ((a == j && b == l) || (a == l && b == j)) return false;
  return true;
}

const char* to_string(Zone z) {
  switch (z) {
    case Zone::CZ: return "CZ";
    case Zone::MZ: return "MZ";
    case Zone::EZ: return "EZ";
    default: return "Exited";
  }
}

const char* to_string(VehicleKind k) {
  return k == VehicleKind::HDV ? "HDV" : "AV";
}

const char* to_string(Phase p) {
  switch (p) {
    case Phase::Green: return "G";
    case Phase::Red: return "R";
    default: return "A";
  }
}

}  // namespace crossim
