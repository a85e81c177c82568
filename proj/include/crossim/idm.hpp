#pragma once

#include <optional>

#include "crossim/geometry.hpp"

namespace crossim {

struct LeaderInfo {
  double position = 0.0;
  double speed = 0.0;
};

struct IdmContext {
  double self_speed = 0.0;
  double self_position = 0.0;
  double desired_speed = 0.0;
  std::optional<LeaderInfo> leader;
  LanePhase lane_phase;
  const IntersectionConfig* cfg = nullptr;
};

// Car-following acceleration. `s` is the gap to the leader (+infinity for a
// free road) and `delta_v` the leader's speed minus the follower's. The
// closing-speed term uses the follower-minus-leader rate, so closing in on a
// slower leader lengthens the desired gap. Output is clamped to
// [-u_min_hard, u_max].
double idm_accel_follow(double v, double v_bar, double s, double delta_v,
                        const IntersectionConfig& cfg);

// Same law against a red light modelled as a static vehicle at the stop line:
// gap L_C - position, closing speed v. Requires position < L_C.
double idm_accel_red_light(double v, double v_bar, double position,
                           const IntersectionConfig& cfg);

// Full human-driver dispatch: close leaders are always followed; otherwise
// the phase decides between free-road driving and the red-light reaction.
// Vehicles at or past the stop line drive as if the light were green. Both
// the leader interaction and the red-light reaction switch off beyond the
// sensing range d_sense.
double hdv_accel(const IdmContext& ctx);

}  // namespace crossim
