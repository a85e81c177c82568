#include "crossim/idm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace crossim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double clamp_accel(double u, const IntersectionConfig& cfg) {
  return std::clamp(u, -cfg.u_min_hard, cfg.u_max);
}

}  // namespace

double idm_accel_follow(double v, double v_bar, double s, double delta_v,
                        const IntersectionConfig& cfg) {
  if (!std::isfinite(v) || !std::isfinite(v_bar) || v_bar <= 0.0)
    throw std::invalid_argument("idm_accel_follow: bad speed input");
  const bool free_road = s == kInf;
  if (!free_road && (!std::isfinite(s) || s <= 0.0 || !std::isfinite(delta_v)))
    throw std::invalid_argument("idm_accel_follow: bad gap input");

  const double speed_term = std::pow(v / v_bar, 4);
  double interaction = 0.0;
  if (!free_road) {
    // Desired gap; the closing-speed term uses follower speed minus leader
    // speed, so approaching a slower leader lengthens it.
    const double closing = -delta_v;
    const double s_star = cfg.s0 + cfg.T_headway * v +
                          v * closing / (2.0 * std::sqrt(cfg.u_max * cfg.u_min));
    const double eps2 = cfg.epsilon_idm * cfg.epsilon_idm;
    interaction = (s_star * s_star) / (s * s + eps2);
  }
  return clamp_accel(cfg.u_max * (1.0 - speed_term - interaction), cfg);
}

double idm_accel_red_light(double v, double v_bar, double position,
                           const IntersectionConfig& cfg) {
  if (!std::isfinite(position) || position >= cfg.L_C)
    throw std::invalid_argument("idm_accel_red_light: position must lie before the stop line");
  // The red light acts as a static vehicle at the stop line.
  return idm_accel_follow(v, v_bar, cfg.L_C - position, -v, cfg);
}

double hdv_accel(const IdmContext& ctx) {
  if (ctx.cfg == nullptr) throw std::invalid_argument("hdv_accel: missing config");
  const IntersectionConfig& cfg = *ctx.cfg;
  const double v = ctx.self_speed;
  const double p = ctx.self_position;
  const double v_bar = ctx.desired_speed;
  if (!std::isfinite(v) || !std::isfinite(p) || v < 0.0)
    throw std::invalid_argument("hdv_accel: bad vehicle state");
  if (ctx.leader && ctx.leader->position < p)
    throw std::invalid_argument("hdv_accel: leader behind follower");

  const double gap = ctx.leader ? ctx.leader->position - p : kInf;
  const double delta_v = ctx.leader ? ctx.leader->speed - v : 0.0;

  // A close leader is followed no matter what the light shows.
  if (gap <= cfg.d_follow) return idm_accel_follow(v, v_bar, gap, delta_v, cfg);

  const double u_follow = gap <= cfg.d_sense
                              ? idm_accel_follow(v, v_bar, gap, delta_v, cfg)
                              : idm_accel_follow(v, v_bar, kInf, 0.0, cfg);

  // Past the stop line every vehicle drives as if the light were green.
  if (p >= cfg.L_C) return u_follow;

  Phase phase = ctx.lane_phase.phase;
  if (phase == Phase::Amber)
    phase = (cfg.L_C - p <= cfg.d_follow) ? Phase::Green : Phase::Red;
  if (phase == Phase::Green) return u_follow;

  // Red: the stop line only matters within sensing range; whichever
  // constraint (leader or light) brakes harder wins.
  if (cfg.L_C - p > cfg.d_sense) return u_follow;
  const double u_red = idm_accel_red_light(v, v_bar, p, cfg);
  return std::min(u_follow, u_red);
}

}  // namespace crossim
