#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace crossim {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

enum class Zone { CZ, MZ, EZ, Exited };
enum class VehicleKind { HDV, AV };
enum class Phase { Green, Red, Amber };

struct LanePhase {
  Phase phase = Phase::Red;
  double phase_entered_at = 0.0;
};

// Static description of the intersection: a single 4-lane junction where each
// lane runs through a control zone of length L_C, a merging zone of length
// L_M, and an exit zone of length L_E. Positions are measured per lane from
// the control-zone entry, so the stop line sits at L_C.
struct IntersectionConfig {
  int n_lanes = 4;
  double L_M = 30.0;
  double L_C = 400.0;
  double L_E = 400.0;
  double v_max = 13.0;   // m/s
  int N_max = 100;       // system-wide vehicle cap
  std::vector<std::pair<int, int>> non_conflicting_pairs = {{1, 3}, {2, 4}};

  double T_S = 0.5;      // integration step, s
  double T_RL = 15.0;    // traffic-light block duration, s (n * T_S)
  double T_alert = 3.0;  // amber duration, s (m * T_S, m < n)
  int d_a = 2;           // actuation delay in blocks

  double d_follow = 5.0;   // close-following threshold, m
  double delta_a = 12.0;   // stop offset before the line, m
  double s0 = 2.0;         // jam distance, m
  double T_headway = 5.0;  // desired time headway, s
  double epsilon_idm = 1.6;
  double u_max = 1.5;      // comfortable acceleration bound, m/s^2
  double u_min = 2.0;      // comfortable deceleration bound, m/s^2
  double lambda_arrival = 450.0;  // total arrival rate, vehicles/hour
  std::vector<double> W = {1.0, 1.0, 1.0, 1.0};  // per-lane queue weights

  // Physical deceleration cap for clamping; defaults to 3 * u_min.
  double u_min_hard = 6.0;
  // Interaction range: beyond this gap (to the leader, or to the stop line
  // when the light is red) a vehicle drives as if the road were free.
  double d_sense = 80.0;

  double total_length() const { return L_C + L_M + L_E; }
  double T_delay() const { return d_a * T_RL; }
  int steps_per_block() const { return static_cast<int>(T_RL / T_S + 0.5); }
  int amber_steps() const { return static_cast<int>(T_alert / T_S + 0.5); }

  void validate() const;  // throws ConfigError with a field-level message
};

// Earliest time a vehicle entering at t_entry can reach the stop line when
// nothing impedes it.
double free_flow_merge_time(double t_entry, const IntersectionConfig& cfg);

// Earliest time such a vehicle can clear the merging zone.
double free_flow_exit_time(double t_entry, const IntersectionConfig& cfg);

// Zone of a per-lane position. Intervals are left-closed: position L_C is
// already in the MZ. Negative positions are rejected.
Zone zone_of(double position, const IntersectionConfig& cfg);

// Whether lanes j and l (1-indexed) may not hold a green light together.
// A lane never conflicts with itself.
bool are_conflicting(int j, int l, const IntersectionConfig& cfg);

const char* to_string(Zone z);
const char* to_string(VehicleKind k);
const char* to_string(Phase p);

}  // namespace crossim
