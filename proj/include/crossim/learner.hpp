#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <string>
#include <unordered_map>
#include <vector>

#include "crossim/actions.hpp"
#include "crossim/config.hpp"
#include "crossim/rng.hpp"

namespace crossim {

struct QEntry {
  double q = 0.0;
  std::uint64_t visits = 0;
};

// Tabular action values over opaque 64-bit state keys. Unvisited entries read
// as zero; ties in the greedy choice go to the lowest action index.
class QTable {
 public:
  explicit QTable(int n_actions) : n_actions_(n_actions) {}

  int n_actions() const { return n_actions_; }
  std::size_t n_states() const { return rows_.size(); }

  double value(std::uint64_t s, int a) const;
  double max_value(std::uint64_t s) const;
  int argmax(std::uint64_t s) const;
  QEntry& entry(std::uint64_t s, int a);

  std::vector<std::uint64_t> sorted_states() const;
  const std::vector<QEntry>* row(std::uint64_t s) const;

 private:
  int n_actions_;
  std::unordered_map<std::uint64_t, std::vector<QEntry>> rows_;
};

// One-step update toward the bootstrapped target r + gamma * max_a' Q(s', .).
void q_update(QTable& table, std::uint64_t s, int a, double reward,
              std::uint64_t s_next, double alpha, double gamma);

// Epsilon-greedy draw; exploration consumes from `rng` only.
int select_action(const QTable& table, std::uint64_t s, double epsilon,
                  RngStream& rng);

// Per-lane queue counts reduced to coarse buckets; the final bucket absorbs
// everything past the table's range.
std::array<int, 4> bucket_queues(const std::array<int, 4>& x, int bucket_width,
                                 int bucket_count);

// The learner's state is the bucketed queue vector joined with the delayed
// actions still in flight, packed little-endian by mixed radix: buckets first
// (radix bucket_count), then the pending actions front to back (radix
// n_actions).
std::uint64_t encode_state(const std::array<int, 4>& buckets,
                           const std::deque<ActionId>& pending,
                           int bucket_count, int n_actions);

struct AugmentedState {
  std::array<int, 4> buckets{};
  std::vector<ActionId> pending;
};
AugmentedState decode_state(std::uint64_t key, int d_a, int bucket_count,
                            int n_actions);

// CSV image of the table: one row per (state, action) with the state shown in
// decoded columns. load(save(T)) reproduces T.
void save_qtable_csv(const std::string& path, const QTable& table,
                     int bucket_count, int d_a);
QTable load_qtable_csv(const std::string& path, int n_actions,
                       int bucket_count, int d_a);

struct TrainPoint {
  int episode = 0;
  double cumulative_reward = 0.0;
  double avg_wait_s = 0.0;
  double avg_queue_per_lane = 0.0;
};

struct TrainResult {
  QTable table;
  std::vector<TrainPoint> curve;
};

// Q-learning over fresh episodes of the simulator: at every block boundary
// the agent observes the bucketed queues plus the in-flight actions, updates
// the previous transition with the weighted queue decrease as reward, and
// picks the next decision epsilon-greedily. Each episode runs on its own
// seed derived from sim.seed.
TrainResult train(const ExperimentConfig& cfg);

void write_training_csv(const std::string& path,
                        const std::vector<TrainPoint>& curve);

}  // namespace crossim
