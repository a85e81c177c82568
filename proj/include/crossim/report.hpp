#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "crossim/config.hpp"
#include "crossim/engine.hpp"
#include "crossim/learner.hpp"
#include "crossim/metrics.hpp"

namespace crossim {

struct EmptyGroup : std::runtime_error {
  explicit EmptyGroup(const std::string& what) : std::runtime_error(what) {}
};

struct EnergyStats {
  std::size_t n = 0;
  std::size_t n_incomplete = 0;
  double mean = 0.0;
  double median = 0.0;
  double mode = 0.0;  // geometric midpoint of the fullest log-spaced bin
  double std_dev = 0.0;
};

// Statistics over the per-journey control energies of one vehicle group.
// Throws EmptyGroup when no journey completed. The mode uses 50 log-spaced
// bins between the extremes; a spreadless or nonpositive sample degenerates
// to the median.
EnergyStats energy_stats(std::vector<double> energies,
                         std::size_t n_incomplete);

struct WaitRow {
  long k = 0;
  double t = 0.0;
  bool has_mean = false;
  double mean_wait_s = 0.0;
  std::size_t n = 0;
};

// Mean waiting time of the vehicles whose merging-zone exit falls in each
// block; blocks nobody exited get an empty mean.
std::vector<WaitRow> waiting_time_rows(const std::vector<VehicleRecord>& rows,
                                       const IntersectionConfig& cfg,
                                       long n_blocks);

enum class Scenario { Mixed50, HdvOnly };
enum class RunMode { Train, Eval };

const char* scenario_name(Scenario s);
Scenario scenario_from_string(const std::string& s);

struct EvalResult {
  std::vector<VehicleRecord> vehicles;
  std::vector<BlockRecord> blocks;
  EngineCounters counters;
  std::size_t incomplete_av = 0;
  std::size_t incomplete_hdv = 0;
};

// One greedy rollout of `table` over sim.horizon_s seconds.
EvalResult evaluate_policy(const ExperimentConfig& cfg, const QTable& table,
                           std::uint64_t seed);

void write_waiting_csv(const std::string& path,
                       const std::vector<WaitRow>& rows);

struct NamedEnergyStats {
  std::string group;
  EnergyStats stats;
};
void write_energy_stats_csv(const std::string& path,
                            const std::vector<NamedEnergyStats>& rows);

// Full experiment: trains first when asked (writing training.csv and
// qtable.csv), then rolls the greedy policy out and writes vehicles.csv,
// blocks.csv, waiting.csv, energy_stats.csv and summary.json into out_dir.
// The scenario fixes the AV share (mixed50 -> 0.5, hdv-only -> 0).
void run_experiment(const ExperimentConfig& cfg, Scenario scenario,
                    RunMode mode, const std::string& out_dir,
                    const std::string& qtable_path = "");

}  // namespace crossim
