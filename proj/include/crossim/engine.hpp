#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <stdexcept>
#include <vector>

#include "crossim/actions.hpp"
#include "crossim/config.hpp"
#include "crossim/geometry.hpp"
#include "crossim/idm.hpp"
#include "crossim/metrics.hpp"
#include "crossim/planner.hpp"
#include "crossim/rng.hpp"

namespace crossim {

struct CollisionError : std::runtime_error {
  explicit CollisionError(const std::string& what) : std::runtime_error(what) {}
};

struct EngineCounters {
  std::uint64_t spawned = 0;
  std::uint64_t exited = 0;            // completed the full corridor
  std::uint64_t dropped_capacity = 0;  // arrival suppressed: system at N_max
  std::uint64_t dropped_jam = 0;       // arrival suppressed: no room at entry
  std::uint64_t red_entries = 0;       // stop line crossed under a red phase
};

struct VehicleState {
  int id = 0;
  int lane = 1;
  VehicleKind kind = VehicleKind::HDV;
  double position = 0.0;
  double speed = 0.0;
  double t_entry = 0.0;
  double initial_accel = 0.0;  // applied once, on the spawn step
  bool fresh = true;
  double energy = 0.0;
  bool crossed = false;
  std::optional<double> t_mz_exit;

  // AV bookkeeping.
  std::optional<TrajectoryPlan> plan;
  bool fallback_engaged = false;  // latched into car-following for good
  bool hdv_this_block = false;    // drives on the human law until replanned
};

// Weighted queue decrease between two consecutive block-boundary states.
double compute_reward(const std::array<int, 4>& x_prev,
                      const std::array<int, 4>& x_now,
                      const std::vector<double>& w);

// Discrete-time simulation of the corridor. Time advances in T_S steps; every
// steps_per_block() steps is a block boundary, where the caller must observe
// the state and actuate an action before stepping on. Actuation pops the
// oldest pending decision (that one colors the starting block) and enqueues
// the new one, so a decision takes effect d_a blocks after it is made.
class Engine {
 public:
  Engine(const ExperimentConfig& cfg, std::uint64_t seed);

  std::int64_t current_step() const { return step_; }
  double now() const { return static_cast<double>(step_) * cfg_.ix.T_S; }
  std::int64_t block_index() const { return step_ / spb_; }
  bool at_block_boundary() const { return step_ % spb_ == 0; }

  // Vehicles currently inside the control zone, per lane.
  std::array<int, 4> observe_state() const;

  // Decisions made but not yet applied; front is applied next.
  const std::deque<ActionId>& pending() const { return pending_; }

  // Applies the head decision to the block starting now, queues `decided`,
  // raises per-lane ambers where the applied colors changed, and announces
  // the queued decision to the AVs (which plan or replan accordingly).
  // Returns the applied action.
  ActionId actuate_block_boundary(ActionId decided);

  // Advances one T_S step: spawn arrivals, pick every vehicle's control from
  // the pre-step state, integrate, then account crossings, merging-zone
  // exits, collisions and completed journeys.
  void step();

  // Convenience: the steps of one full block (must be actuated already).
  void run_block();

  // Places a vehicle directly on the road; returns its id.
  int inject_vehicle(int lane, VehicleKind kind, double position, double speed);

  const std::vector<VehicleState>& vehicles() const { return vehicles_; }
  const std::vector<VehicleRecord>& completed() const { return completed_; }
  const EngineCounters& counters() const { return counters_; }

  Phase lane_phase(int lane1) const;
  // Block colors currently applied, 'G'/'R' per lane (amber shown as its
  // block color).
  std::array<char, 4> applied_colors() const;

 private:
  struct LaneOrder;  // per-lane indices sorted by descending position

  void spawn_arrivals();
  std::vector<std::vector<int>> lanes_sorted() const;
  std::optional<LeaderInfo> leader_of(const std::vector<int>& lane_order,
                                      int rank) const;
  double control_for(VehicleState& v, const std::optional<LeaderInfo>& leader);
  double av_control(VehicleState& v, const std::optional<LeaderInfo>& leader);
  double envelope(double u_desired, const VehicleState& v,
                  const std::optional<LeaderInfo>& leader) const;
  void announce_to_avs(ActionId decided, ActionId before_announced);
  void check_collisions() const;
  LanePhase lane_phase_full(int lane1) const;

  ExperimentConfig cfg_;
  int spb_ = 0;
  std::int64_t step_ = 0;
  std::int64_t actuated_block_ = -1;

  std::deque<ActionId> pending_;
  ActionId prev_applied_ = ActionId::OpenPair13;
  std::array<Phase, 4> block_color_{};
  std::array<std::int64_t, 4> amber_end_step_{};
  std::array<double, 4> block_start_t_{};

  std::vector<VehicleState> vehicles_;
  std::vector<VehicleRecord> completed_;
  EngineCounters counters_;
  int next_id_ = 1;

  RngStream arrivals_;
  RngStream kinds_;
  RngStream speeds_;
};

}  // namespace crossim
