#include "crossim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "crossim/idm.hpp"

namespace crossim {

namespace {

// Entry kinematics of fresh arrivals.
constexpr double kEntrySpeedLo = 9.0;
constexpr double kEntrySpeedHi = 11.0;
constexpr double kEntryAccelLo = 0.0;
constexpr double kEntryAccelHi = 0.5;

}  // namespace

double compute_reward(const std::array<int, 4>& x_prev,
                      const std::array<int, 4>& x_now,
                      const std::vector<double>& w) {
  double g = 0.0;
  for (std::size_t j = 0; j < 4; ++j)
    g += w[j] * (x_prev[j] - x_now[j]);
  return g;
}

Engine::Engine(const ExperimentConfig& cfg, std::uint64_t seed)
    : cfg_(cfg),
      arrivals_(seed, "arrivals"),
      kinds_(seed, "kinds"),
      speeds_(seed, "speeds") {
  cfg_.validate();
  spb_ = cfg_.ix.steps_per_block();
  for (int i = 0; i < cfg_.ix.d_a; ++i) pending_.push_back(ActionId::OpenPair13);
  prev_applied_ = pending_.front();
  for (int lane = 1; lane <= 4; ++lane) {
    block_color_[lane - 1] =
        lane_green(prev_applied_, lane) ? Phase::Green : Phase::Red;
    amber_end_step_[lane - 1] = 0;
    block_start_t_[lane - 1] = 0.0;
  }
}

std::array<int, 4> Engine::observe_state() const {
  std::array<int, 4> x{};
  for (const VehicleState& v : vehicles_)
    if (v.position < cfg_.ix.L_C) ++x[static_cast<std::size_t>(v.lane - 1)];
  return x;
}

LanePhase Engine::lane_phase_full(int lane1) const {
  LanePhase lp;
  lp.phase = step_ < amber_end_step_[lane1 - 1] ? Phase::Amber
                                                : block_color_[lane1 - 1];
  lp.phase_entered_at = block_start_t_[lane1 - 1];
  return lp;
}

Phase Engine::lane_phase(int lane1) const { return lane_phase_full(lane1).phase; }

std::array<char, 4> Engine::applied_colors() const {
  std::array<char, 4> c{};
  for (int lane = 1; lane <= 4; ++lane)
    c[lane - 1] = block_color_[lane - 1] == Phase::Green ? 'G' : 'R';
  return c;
}

ActionId Engine::actuate_block_boundary(ActionId decided) {
  if (!at_block_boundary())
    throw std::logic_error("actuate_block_boundary: not at a block boundary");
  if (actuated_block_ == block_index())
    throw std::logic_error("actuate_block_boundary: block already actuated");

  const ActionId head = pending_.front();
  pending_.pop_front();
  for (int lane = 1; lane <= 4; ++lane) {
    const bool was_green = lane_green(prev_applied_, lane);
    const bool is_green = lane_green(head, lane);
    block_color_[lane - 1] = is_green ? Phase::Green : Phase::Red;
    amber_end_step_[lane - 1] =
        step_ + (was_green != is_green ? cfg_.ix.amber_steps() : 0);
    block_start_t_[lane - 1] = now();
  }
  prev_applied_ = head;

  // The block right before the announced one decides whether that block opens
  // with an amber head.
  const ActionId before_announced = pending_.empty() ? head : pending_.back();
  pending_.push_back(decided);
  actuated_block_ = block_index();

  announce_to_avs(decided, before_announced);
  return head;
}

std::vector<std::vector<int>> Engine::lanes_sorted() const {
  std::vector<std::vector<int>> order(4);
  for (int i = 0; i < static_cast<int>(vehicles_.size()); ++i)
    order[static_cast<std::size_t>(vehicles_[static_cast<std::size_t>(i)].lane - 1)]
        .push_back(i);
  for (auto& lane : order)
    std::sort(lane.begin(), lane.end(), [this](int a, int b) {
      return vehicles_[static_cast<std::size_t>(a)].position >
             vehicles_[static_cast<std::size_t>(b)].position;
    });
  return order;
}

std::optional<LeaderInfo> Engine::leader_of(const std::vector<int>& lane_order,
                                            int rank) const {
  if (rank <= 0) return std::nullopt;
  const VehicleState& lead =
      vehicles_[static_cast<std::size_t>(lane_order[static_cast<std::size_t>(rank - 1)])];
  return LeaderInfo{lead.position, lead.speed};
}

void Engine::announce_to_avs(ActionId decided, ActionId before_announced) {
  std::array<bool, 4> amber_applies{};
  for (int lane = 1; lane <= 4; ++lane)
    amber_applies[lane - 1] =
        lane_green(decided, lane) != lane_green(before_announced, lane);

  const auto order = lanes_sorted();
  for (int lane = 1; lane <= 4; ++lane) {
    const auto& lane_order = order[static_cast<std::size_t>(lane - 1)];
    for (int rank = 0; rank < static_cast<int>(lane_order.size()); ++rank) {
      VehicleState& v =
          vehicles_[static_cast<std::size_t>(lane_order[static_cast<std::size_t>(rank)])];
      if (v.kind != VehicleKind::AV || v.crossed || v.fallback_engaged) continue;

      // An overrun crossing plan (the envelope held the vehicle back) is
      // discarded here; an intact one is executed to the end.
      if (v.plan && v.plan->kind == PlanKind::Cross) {
        if (v.plan->exhausted_at_step(step_)) v.plan.reset();
        else continue;
      }
      v.hdv_this_block = false;

      const auto leader = leader_of(lane_order, rank);
      std::optional<double> gap;
      if (leader) gap = leader->position - v.position;
      if (should_fallback(gap, cfg_.ix)) {
        v.fallback_engaged = true;
        v.plan.reset();
        continue;
      }
      if (cfg_.planner.scope == PlanScope::LeadOnly && leader &&
          leader->position < cfg_.ix.L_C) {
        v.hdv_this_block = true;
        continue;
      }

      PlanRequest req;
      req.t_now = now();
      req.p_now = v.position;
      // Executed plans may carry the speed into the solver's tolerance band
      // above v_max; the replanning boundary condition is clamped back.
      req.v_now = std::min(v.speed, cfg_.ix.v_max);
      req.announced = lane_green(decided, lane) ? AnnouncedColor::Green
                                                : AnnouncedColor::Red;
      req.amber_applies = amber_applies[lane - 1];
      req.cfg = cfg_.ix;

      try {
        if (v.plan) {  // a Stop plan, running or exhausted (standing)
          v.plan = replan_on_green(*v.plan, req, cfg_.planner.weights,
                                   cfg_.planner.solver);
        } else if (req.announced == AnnouncedColor::Green) {
          v.plan = plan_green(req, cfg_.planner.weights, cfg_.planner.solver);
        } else {
          auto stop = plan_red(req, cfg_.planner.weights, cfg_.planner.solver);
          if (stop) v.plan = std::move(*stop);
          else v.hdv_this_block = true;  // already past the stop point
        }
      } catch (const InfeasibleWindow&) {
        v.plan.reset();
        v.hdv_this_block = true;
      }
    }
  }
}

void Engine::spawn_arrivals() {
  const double mean = cfg_.ix.lambda_arrival / 3600.0 * cfg_.ix.T_S;
  const int n = arrivals_.poisson(mean);
  for (int i = 0; i < n; ++i) {
    const int lane = 1 + arrivals_.uniform_int(cfg_.ix.n_lanes);
    // The kind draw is always consumed so that the AV share does not shift
    // the other streams.
    const VehicleKind kind = kinds_.uniform() < cfg_.sim.p_av ? VehicleKind::AV
                                                              : VehicleKind::HDV;
    const double v0 = speeds_.uniform(kEntrySpeedLo, kEntrySpeedHi);
    const double u0 = speeds_.uniform(kEntryAccelLo, kEntryAccelHi);

    if (static_cast<int>(vehicles_.size()) >= cfg_.ix.N_max) {
      ++counters_.dropped_capacity;
      continue;
    }
    double rear = std::numeric_limits<double>::infinity();
    for (const VehicleState& v : vehicles_)
      if (v.lane == lane) rear = std::min(rear, v.position);
    if (rear < cfg_.ix.s0) {
      ++counters_.dropped_jam;
      continue;
    }

    VehicleState v;
    v.id = next_id_++;
    v.lane = lane;
    v.kind = kind;
    v.speed = v0;
    v.t_entry = now();
    v.initial_accel = u0;
    vehicles_.push_back(v);
    ++counters_.spawned;
  }
}

int Engine::inject_vehicle(int lane, VehicleKind kind, double position,
                           double speed) {
  if (lane < 1 || lane > 4) throw std::invalid_argument("inject_vehicle: lane");
  VehicleState v;
  v.id = next_id_++;
  v.lane = lane;
  v.kind = kind;
  v.position = position;
  v.speed = speed;
  v.t_entry = now();
  v.fresh = false;
  v.crossed = position >= cfg_.ix.L_C;
  if (position >= cfg_.ix.L_C + cfg_.ix.L_M) v.t_mz_exit = now();
  vehicles_.push_back(v);
  ++counters_.spawned;
  return v.id;
}

double Engine::envelope(double u_desired, const VehicleState& v,
                        const std::optional<LeaderInfo>& leader) const {
  if (!leader) return u_desired;
  const double gap = leader->position - v.position;
  if (gap > cfg_.ix.d_sense) return u_desired;
  const double u_follow = idm_accel_follow(v.speed, cfg_.ix.v_max, gap,
                                           leader->speed - v.speed, cfg_.ix);
  return std::min(u_desired, u_follow);
}

double Engine::av_control(VehicleState& v,
                          const std::optional<LeaderInfo>& leader) {
  IdmContext ctx;
  ctx.self_speed = v.speed;
  ctx.self_position = v.position;
  ctx.desired_speed = cfg_.ix.v_max;
  ctx.leader = leader;
  ctx.lane_phase = lane_phase_full(v.lane);
  ctx.cfg = &cfg_.ix;

  if (v.fallback_engaged) return hdv_accel(ctx);
  if (v.crossed) return envelope(0.0, v, leader);  // holds v_max past the line

  std::optional<double> gap;
  if (leader) gap = leader->position - v.position;
  if (should_fallback(gap, cfg_.ix)) {
    v.fallback_engaged = true;
    v.plan.reset();
    return hdv_accel(ctx);
  }

  if (v.plan) {
    if (!v.plan->exhausted_at_step(step_))
      return envelope(v.plan->control_at_step(step_), v, leader);
    if (v.plan->kind == PlanKind::Stop)
      // Standing (or crawling short of the stop point): never accelerate, but
      // keep braking for leaders and the line.
      return std::min(0.0, hdv_accel(ctx));
    return hdv_accel(ctx);  // overrun Cross plan: drive defensively
  }
  if (v.hdv_this_block) return hdv_accel(ctx);
  return envelope(0.0, v, leader);  // constant-speed cruise before first plan
}

double Engine::control_for(VehicleState& v,
                           const std::optional<LeaderInfo>& leader) {
  if (v.fresh) {
    v.fresh = false;
    return v.initial_accel;
  }
  if (v.kind == VehicleKind::AV) return av_control(v, leader);
  IdmContext ctx;
  ctx.self_speed = v.speed;
  ctx.self_position = v.position;
  ctx.desired_speed = cfg_.ix.v_max;
  ctx.leader = leader;
  ctx.lane_phase = lane_phase_full(v.lane);
  ctx.cfg = &cfg_.ix;
  return hdv_accel(ctx);
}

void Engine::check_collisions() const {
  const auto order = lanes_sorted();
  for (int lane = 1; lane <= 4; ++lane) {
    const auto& lane_order = order[static_cast<std::size_t>(lane - 1)];
    for (std::size_t r = 1; r < lane_order.size(); ++r) {
      const VehicleState& lead = vehicles_[static_cast<std::size_t>(lane_order[r - 1])];
      const VehicleState& follow = vehicles_[static_cast<std::size_t>(lane_order[r])];
      if (follow.position >= lead.position) {
        std::ostringstream os;
        os << "collision in lane " << lane << " at t=" << now() + cfg_.ix.T_S
           << ": vehicle " << follow.id << " (p=" << follow.position
           << ") reached vehicle " << lead.id << " (p=" << lead.position << ")";
        throw CollisionError(os.str());
      }
    }
  }
}

void Engine::step() {
  if (at_block_boundary() && actuated_block_ != block_index())
    throw std::logic_error("step: block boundary not actuated");

  spawn_arrivals();

  const auto order = lanes_sorted();
  std::vector<double> controls(vehicles_.size(), 0.0);
  for (int lane = 1; lane <= 4; ++lane) {
    const auto& lane_order = order[static_cast<std::size_t>(lane - 1)];
    for (int rank = 0; rank < static_cast<int>(lane_order.size()); ++rank) {
      const int idx = lane_order[static_cast<std::size_t>(rank)];
      controls[static_cast<std::size_t>(idx)] = control_for(
          vehicles_[static_cast<std::size_t>(idx)], leader_of(lane_order, rank));
    }
  }

  const double h = cfg_.ix.T_S;
  const double t_after = now() + h;
  for (std::size_t i = 0; i < vehicles_.size(); ++i) {
    VehicleState& v = vehicles_[i];
    const double u = controls[i];
    v.energy += u * u * h;
    v.speed = std::max(0.0, v.speed + u * h);
    const double p_before = v.position;
    v.position += v.speed * h;

    if (p_before < cfg_.ix.L_C && v.position >= cfg_.ix.L_C) {
      v.crossed = true;
      if (lane_phase(v.lane) == Phase::Red) ++counters_.red_entries;
      // Past the line an AV is carried at the corridor speed; the control it
      // applies there is zero unless a leader forces braking.
      if (v.kind == VehicleKind::AV) v.speed = cfg_.ix.v_max;
    }
    if (!v.t_mz_exit && v.position >= cfg_.ix.L_C + cfg_.ix.L_M)
      v.t_mz_exit = t_after;
  }

  check_collisions();

  for (std::size_t i = 0; i < vehicles_.size();) {
    VehicleState& v = vehicles_[i];
    if (v.position >= cfg_.ix.total_length()) {
      VehicleRecord rec;
      rec.id = v.id;
      rec.lane = v.lane;
      rec.kind = v.kind;
      rec.t_entry = v.t_entry;
      rec.t_exit = t_after;
      const double mz_exit = v.t_mz_exit ? *v.t_mz_exit : t_after;
      rec.wait_time = mz_exit - free_flow_exit_time(v.t_entry, cfg_.ix);
      rec.energy = v.energy;
      completed_.push_back(rec);
      ++counters_.exited;
      vehicles_.erase(vehicles_.begin() + static_cast<std::ptrdiff_t>(i));
    } else {
      ++i;
    }
  }

  ++step_;
}

void Engine::run_block() {
  for (int i = 0; i < spb_; ++i) step();
}

}  // namespace crossim
