#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "crossim/geometry.hpp"

namespace crossim {

struct InfeasibleWindow : std::runtime_error {
  explicit InfeasibleWindow(const std::string& what) : std::runtime_error(what) {}
};

enum class PlanKind { Cross, Stop };
enum class AnnouncedColor { Green, Red };

// Weights of the soft constraints in the relaxed minimum-energy problem.
struct PenaltyWeights {
  double k_vmax = 1e3;
  double k_vmin = 1e3;
  double k1_tcross = 1e4;  // crossing earlier than the window opens
  double k2_tcross = 1e4;  // crossing later than the window closes
};

struct SolverOptions {
  int max_iters = 500;
  double rel_tol = 1e-8;   // stop when the objective stalls relative to this
  double tol_v = 0.05;     // accepted speed-bound violation, m/s
  // Pin the crossing speed to v_max (otherwise the crossing speed is free and
  // the vehicle is brought to v_max only after the line).
  bool pin_terminal_speed = false;
};

// What an AV knows when it plans at a block boundary t_now: its own state and
// the color announced for the block that starts at t_now + d_a * T_RL.
struct PlanRequest {
  double t_now = 0.0;  // an integer multiple of T_RL
  double p_now = 0.0;
  double v_now = 0.0;
  AnnouncedColor announced = AnnouncedColor::Green;
  bool amber_applies = false;  // the announced block opens with an amber head
  // Extra distance before the nominal stop point; stopping vehicles stack up
  // behind their queued leaders instead of all aiming at the same spot.
  double stop_stack_offset = 0.0;
  IntersectionConfig cfg;

  void validate() const;
  double window_start() const;  // earliest legal crossing time
  double window_end() const;    // end of the announced block
};

// Piecewise-constant control sequence, one value per T_S starting at t_start.
struct TrajectoryPlan {
  double t_start = 0.0;
  std::int64_t start_step = 0;
  std::vector<double> controls;
  double t_terminal = 0.0;  // crossing time (Cross) or stop time (Stop)
  PlanKind kind = PlanKind::Cross;
  double objective_value = 0.0;   // (1/2) * sum u^2 * T_S
  double speed_violation = 0.0;   // integral of max(0, v - v_max)
  double terminal_speed = 0.0;

  int n_steps() const { return static_cast<int>(controls.size()); }
  // Control applied during engine step `step` (absolute step index).
  double control_at_step(std::int64_t step) const {
    const std::int64_t i = step - start_step;
    return (i >= 0 && i < n_steps()) ? controls[static_cast<std::size_t>(i)] : 0.0;
  }
  bool exhausted_at_step(std::int64_t step) const {
    return step - start_step >= n_steps();
  }
};

// Continuous-time minimum-energy connection of two phase points in fixed time
// T: the optimal control is affine, u(t) = a + b t.
struct AffineMinEnergy {
  double a = 0.0;
  double b = 0.0;
  double objective = 0.0;  // (1/2) * integral of u^2
};
AffineMinEnergy analytic_min_energy(double p0, double v0, double pf, double vf,
                                    double T);
// Variant with the terminal speed left free (transversality gives u(T) = 0).
AffineMinEnergy analytic_min_energy_free_vf(double p0, double v0, double pf,
                                            double T);

// Plan a crossing inside the announced green block. Enumerates the crossing
// time over the T_S grid and solves a penalty-relaxed minimum-energy problem
// for each candidate; the cheapest wins, ties to the earliest crossing.
TrajectoryPlan plan_green(const PlanRequest& req, const PenaltyWeights& w,
                          const SolverOptions& opt);

// Plan a stop at L_C - delta_a, at rest, by the announced red block's start.
// Returns nothing when the vehicle is already past the stop point.
std::optional<TrajectoryPlan> plan_red(const PlanRequest& req,
                                       const PenaltyWeights& w,
                                       const SolverOptions& opt);

// A stopped or stopping AV that hears green re-solves the crossing problem
// from its current state. A red announcement leaves the plan untouched.
TrajectoryPlan replan_on_green(const TrajectoryPlan& current,
                               const PlanRequest& req, const PenaltyWeights& w,
                               const SolverOptions& opt);

// True when a leader exists and sits within d_follow; the caller then latches
// the AV into car-following for the rest of its journey.
bool should_fallback(std::optional<double> leader_gap,
                     const IntersectionConfig& cfg);

// Full relaxed objective of a plan: control energy, speed-bound penalties and
// (for Cross plans) the crossing-window penalties.
double penalty_objective(const TrajectoryPlan& plan, const PlanRequest& req,
                         const PenaltyWeights& w);

// Analytic gradient of penalty_objective with respect to the controls.
std::vector<double> penalty_gradient(const TrajectoryPlan& plan,
                                     const PlanRequest& req,
                                     const PenaltyWeights& w);

struct PlanRow {
  double t, u, v, p;
};
// Row-per-step trace of a plan integrated from the request state.
std::vector<PlanRow> plan_table(const TrajectoryPlan& plan,
                                const PlanRequest& req);

}  // namespace crossim
