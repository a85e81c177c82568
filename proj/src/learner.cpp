#include "crossim/learner.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "crossim/engine.hpp"
#include "crossim/metrics.hpp"

namespace crossim {

double QTable::value(std::uint64_t s, int a) const {
  const auto it = rows_.find(s);
  if (it == rows_.end()) return 0.0;
  return it->second[static_cast<std::size_t>(a)].q;
}

double QTable::max_value(std::uint64_t s) const {
  double best = value(s, 0);
  for (int a = 1; a < n_actions_; ++a) best = std::max(best, value(s, a));
  return best;
}

int QTable::argmax(std::uint64_t s) const {
  int best = 0;
  double best_q = value(s, 0);
  for (int a = 1; a < n_actions_; ++a) {
    const double q = value(s, a);
    if (q > best_q) {
      best_q = q;
      best = a;
    }
  }
  return best;
}

QEntry& QTable::entry(std::uint64_t s, int a) {
  auto& row = rows_[s];
  if (row.empty()) row.resize(static_cast<std::size_t>(n_actions_));
  return row[static_cast<std::size_t>(a)];
}

std::vector<std::uint64_t> QTable::sorted_states() const {
  std::vector<std::uint64_t> keys;
  keys.reserve(rows_.size());
  for (const auto& [k, _] : rows_) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  return keys;
}

const std::vector<QEntry>* QTable::row(std::uint64_t s) const {
  const auto it = rows_.find(s);
  return it == rows_.end() ? nullptr : &it->second;
}

void q_update(QTable& table, std::uint64_t s, int a, double reward,
              std::uint64_t s_next, double alpha, double gamma) {
  QEntry& e = table.entry(s, a);
  e.q += alpha * (reward + gamma * table.max_value(s_next) - e.q);
  ++e.visits;
}

int select_action(const QTable& table, std::uint64_t s, double epsilon,
                  RngStream& rng) {
  if (rng.bernoulli(epsilon)) return rng.uniform_int(table.n_actions());
  return table.argmax(s);
}

std::array<int, 4> bucket_queues(const std::array<int, 4>& x, int bucket_width,
                                 int bucket_count) {
  std::array<int, 4> b{};
  for (std::size_t j = 0; j < 4; ++j)
    b[j] = std::min(x[j] / bucket_width, bucket_count - 1);
  return b;
}

std::uint64_t encode_state(const std::array<int, 4>& buckets,
                           const std::deque<ActionId>& pending,
                           int bucket_count, int n_actions) {
  std::uint64_t key = 0;
  for (int b : buckets)
    key = key * static_cast<std::uint64_t>(bucket_count) +
          static_cast<std::uint64_t>(b);
  for (ActionId a : pending)
    key = key * static_cast<std::uint64_t>(n_actions) +
          static_cast<std::uint64_t>(a);
  return key;
}

AugmentedState decode_state(std::uint64_t key, int d_a, int bucket_count,
                            int n_actions) {
  AugmentedState st;
  st.pending.resize(static_cast<std::size_t>(d_a));
  for (int i = d_a - 1; i >= 0; --i) {
    st.pending[static_cast<std::size_t>(i)] =
        static_cast<ActionId>(key % static_cast<std::uint64_t>(n_actions));
    key /= static_cast<std::uint64_t>(n_actions);
  }
  for (int j = 3; j >= 0; --j) {
    st.buckets[static_cast<std::size_t>(j)] =
        static_cast<int>(key % static_cast<std::uint64_t>(bucket_count));
    key /= static_cast<std::uint64_t>(bucket_count);
  }
  return st;
}

void save_qtable_csv(const std::string& path, const QTable& table,
                     int bucket_count, int d_a) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "bucket1,bucket2,bucket3,bucket4";
  for (int i = 1; i <= d_a; ++i) out << ",pending" << i;
  out << ",action,q,visits\n";
  for (std::uint64_t s : table.sorted_states()) {
    const auto* row = table.row(s);
    const AugmentedState st = decode_state(s, d_a, bucket_count,
                                           table.n_actions());
    for (int a = 0; a < table.n_actions(); ++a) {
      const QEntry& e = (*row)[static_cast<std::size_t>(a)];
      if (e.q == 0.0 && e.visits == 0) continue;
      for (int b : st.buckets) out << b << ',';
      for (ActionId p : st.pending) out << static_cast<int>(p) << ',';
      out << a << ',' << fmt_num(e.q) << ',' << e.visits << '\n';
    }
  }
}

QTable load_qtable_csv(const std::string& path, int n_actions,
                       int bucket_count, int d_a) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  QTable table(n_actions);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("empty q-table file: " + path);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (static_cast<int>(cells.size()) != 4 + d_a + 3)
      throw std::runtime_error("malformed q-table row: " + line);
    std::array<int, 4> buckets{};
    for (std::size_t j = 0; j < 4; ++j) buckets[j] = std::stoi(cells[j]);
    std::deque<ActionId> pending;
    for (int i = 0; i < d_a; ++i)
      pending.push_back(
          static_cast<ActionId>(std::stoi(cells[4 + static_cast<std::size_t>(i)])));
    const int a = std::stoi(cells[4 + static_cast<std::size_t>(d_a)]);
    const std::uint64_t s = encode_state(buckets, pending, bucket_count,
                                         n_actions);
    QEntry& e = table.entry(s, a);
    e.q = std::stod(cells[5 + static_cast<std::size_t>(d_a)]);
    e.visits = std::stoull(cells[6 + static_cast<std::size_t>(d_a)]);
  }
  return table;
}

TrainResult train(const ExperimentConfig& cfg) {
  const LearnerConfig& lc = cfg.learner;
  TrainResult result{QTable(lc.n_actions()), {}};
  std::uint64_t updates = 0;

  for (int episode = 0; episode < lc.episodes; ++episode) {
    const std::uint64_t ep_seed =
        derive_seed(cfg.sim.seed, "episode-" + std::to_string(episode));
    Engine eng(cfg, ep_seed);
    RngStream explore(ep_seed, "exploration");

    double cumulative = 0.0;
    double queue_sum = 0.0;
    std::array<int, 4> x_prev{};
    std::uint64_t s_prev = 0;
    int a_prev = 0;

    for (int k = 0; k < lc.episode_length_blocks; ++k) {
      const std::array<int, 4> x = eng.observe_state();
      const std::uint64_t s = encode_state(
          bucket_queues(x, lc.bucket_width, lc.bucket_count), eng.pending(),
          lc.bucket_count, lc.n_actions());
      if (k > 0) {
        const double g = compute_reward(x_prev, x, cfg.ix.W);
        cumulative += g;
        q_update(result.table, s_prev, a_prev, g, s, lc.alpha.at(updates),
                 lc.gamma);
      }
      for (int q : x) queue_sum += q;
      const int a = select_action(result.table, s, lc.epsilon.at(updates),
                                  explore);
      eng.actuate_block_boundary(static_cast<ActionId>(a));
      ++updates;
      eng.run_block();

      x_prev = x;
      s_prev = s;
      a_prev = a;
    }

    // Close the episode on the final boundary state.
    const std::array<int, 4> x_end = eng.observe_state();
    const std::uint64_t s_end = encode_state(
        bucket_queues(x_end, lc.bucket_width, lc.bucket_count), eng.pending(),
        lc.bucket_count, lc.n_actions());
    const double g_end = compute_reward(x_prev, x_end, cfg.ix.W);
    cumulative += g_end;
    q_update(result.table, s_prev, a_prev, g_end, s_end, lc.alpha.at(updates),
             lc.gamma);

    TrainPoint pt;
    pt.episode = episode;
    pt.cumulative_reward = cumulative;
    double wait_sum = 0.0;
    for (const VehicleRecord& r : eng.completed()) wait_sum += r.wait_time;
    pt.avg_wait_s = eng.completed().empty()
                        ? 0.0
                        : wait_sum / static_cast<double>(eng.completed().size());
    pt.avg_queue_per_lane =
        queue_sum / (4.0 * static_cast<double>(lc.episode_length_blocks));
    result.curve.push_back(pt);
  }
  return result;
}

void write_training_csv(const std::string& path,
                        const std::vector<TrainPoint>& curve) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "episode,cumulative_reward,avg_wait_s,avg_queue_per_lane\n";
  for (const TrainPoint& pt : curve) {
    out << pt.episode << ',' << fmt_num(pt.cumulative_reward) << ','
        << fmt_num(pt.avg_wait_s) << ',' << fmt_num(pt.avg_queue_per_lane)
        << '\n';
  }
}

}  // namespace crossim
