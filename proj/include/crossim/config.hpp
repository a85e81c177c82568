#pragma once

#include <cstdint>
#include <string>

#include "crossim/geometry.hpp"
#include "crossim/planner.hpp"

namespace crossim {

// Scalar schedule for learning-rate/exploration decay, written in config
// files as "exp:init:decay:floor" or "const:value".
struct Schedule {
  enum class Kind { Constant, ExpDecay };
  Kind kind = Kind::ExpDecay;
  double init = 0.5;
  double decay = 0.9995;
  double floor = 0.05;

  double at(std::uint64_t t) const;
  std::string describe() const;
  static Schedule parse(const std::string& text);
};

struct SimConfig {
  std::uint64_t seed = 1;
  double p_av = 0.5;        // probability an arrival is an AV
  double horizon_s = 3600;  // simulated duration of one run
};

struct LearnerConfig {
  double gamma = 0.95;
  Schedule alpha{Schedule::Kind::ExpDecay, 0.5, 0.9995, 0.05};
  Schedule epsilon{Schedule::Kind::ExpDecay, 1.0, 0.999, 0.05};
  int bucket_width = 5;   // queue-count width of one bucket
  int bucket_count = 6;   // buckets per lane; the last absorbs the tail
  int episodes = 300;
  int episode_length_blocks = 240;
  bool allow_all_red = false;  // adds AllRed as a third action

  int n_actions() const { return allow_all_red ? 3 : 2; }
  void validate() const;
};

// Which AVs solve the crossing problem at a block boundary: every AV whose
// leader gap exceeds d_follow, or only the lane's lead vehicle.
enum class PlanScope { Free, LeadOnly };

struct PlannerConfig {
  PenaltyWeights weights;
  SolverOptions solver;
  PlanScope scope = PlanScope::Free;
};

struct ExperimentConfig {
  IntersectionConfig ix;
  SimConfig sim;
  LearnerConfig learner;
  PlannerConfig planner;

  void validate() const;
};

// Flat key-value configuration ("key = value" lines, '#' comments). Every
// field of the structs above has a key named after it; unknown keys are
// rejected with the offending name.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// All effective parameters, defaults included, with a stable key order.
std::string config_to_json(const ExperimentConfig& cfg);

}  // namespace crossim
