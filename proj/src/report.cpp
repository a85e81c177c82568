#include "crossim/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "json.hpp"

namespace crossim {

EnergyStats energy_stats(std::vector<double> energies,
                         std::size_t n_incomplete) {
  if (energies.empty())
    throw EmptyGroup("energy statistics requested for an empty group");
  std::sort(energies.begin(), energies.end());
  EnergyStats st;
  st.n = energies.size();
  st.n_incomplete = n_incomplete;
  st.mean = std::accumulate(energies.begin(), energies.end(), 0.0) /
            static_cast<double>(st.n);
  st.median = st.n % 2 == 1
                  ? energies[st.n / 2]
                  : 0.5 * (energies[st.n / 2 - 1] + energies[st.n / 2]);
  if (st.n > 1) {
    double ss = 0.0;
    for (double e : energies) ss += (e - st.mean) * (e - st.mean);
    st.std_dev = std::sqrt(ss / static_cast<double>(st.n - 1));
  }

  const double lo = energies.front();
  const double hi = energies.back();
  if (lo <= 0.0 || lo == hi) {
    st.mode = st.median;
    return st;
  }
  constexpr int kBins = 50;
  std::array<int, kBins> counts{};
  const double log_span = std::log(hi / lo);
  for (double e : energies) {
    int b = static_cast<int>(std::log(e / lo) / log_span * kBins);
    b = std::clamp(b, 0, kBins - 1);
    ++counts[static_cast<std::size_t>(b)];
  }
  int best = 0;
  for (int b = 1; b < kBins; ++b)
    if (counts[static_cast<std::size_t>(b)] > counts[static_cast<std::size_t>(best)])
      best = b;
  const double edge_lo = lo * std::exp(log_span * best / kBins);
  const double edge_hi = lo * std::exp(log_span * (best + 1) / kBins);
  st.mode = std::sqrt(edge_lo * edge_hi);
  return st;
}

std::vector<WaitRow> waiting_time_rows(const std::vector<VehicleRecord>& rows,
                                       const IntersectionConfig& cfg,
                                       long n_blocks) {
  std::vector<WaitRow> out(static_cast<std::size_t>(std::max(0L, n_blocks)));
  std::vector<double> sums(out.size(), 0.0);
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k].k = static_cast<long>(k);
    out[k].t = static_cast<double>(k) * cfg.T_RL;
  }
  for (const VehicleRecord& r : rows) {
    const double mz_exit = r.wait_time + free_flow_exit_time(r.t_entry, cfg);
    const long k = static_cast<long>(std::floor(mz_exit / cfg.T_RL));
    if (k < 0 || k >= n_blocks) continue;
    sums[static_cast<std::size_t>(k)] += r.wait_time;
    ++out[static_cast<std::size_t>(k)].n;
  }
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (out[k].n > 0) {
      out[k].has_mean = true;
      out[k].mean_wait_s = sums[k] / static_cast<double>(out[k].n);
    }
  }
  return out;
}

const char* scenario_name(Scenario s) {
  return s == Scenario::Mixed50 ? "mixed50" : "hdv-only";
}

Scenario scenario_from_string(const std::string& s) {
  if (s == "mixed50") return Scenario::Mixed50;
  if (s == "hdv-only") return Scenario::HdvOnly;
  throw ConfigError("unknown scenario: '" + s + "' (mixed50, hdv-only)");
}

EvalResult evaluate_policy(const ExperimentConfig& cfg, const QTable& table,
                           std::uint64_t seed) {
  const long n_blocks =
      static_cast<long>(std::ceil(cfg.sim.horizon_s / cfg.ix.T_RL - 1e-9));
  Engine eng(cfg, seed);
  EvalResult ev;
  std::array<int, 4> x_prev{};
  for (long k = 0; k < n_blocks; ++k) {
    const std::array<int, 4> x = eng.observe_state();
    const std::uint64_t s = encode_state(
        bucket_queues(x, cfg.learner.bucket_width, cfg.learner.bucket_count),
        eng.pending(), cfg.learner.bucket_count, cfg.learner.n_actions());
    const ActionId a = static_cast<ActionId>(table.argmax(s));

    BlockRecord rec;
    rec.k = k;
    rec.t = eng.now();
    rec.queues = x;
    rec.decided = a;
    rec.applied = eng.actuate_block_boundary(a);
    rec.colors = eng.applied_colors();
    rec.reward = k > 0 ? compute_reward(x_prev, x, cfg.ix.W) : 0.0;
    ev.blocks.push_back(rec);

    eng.run_block();
    x_prev = x;
  }
  ev.vehicles = eng.completed();
  ev.counters = eng.counters();
  for (const VehicleState& v : eng.vehicles()) {
    if (v.kind == VehicleKind::AV) ++ev.incomplete_av;
    else ++ev.incomplete_hdv;
  }
  return ev;
}

void write_waiting_csv(const std::string& path,
                       const std::vector<WaitRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "k,t,mean_wait_s,n\n";
  for (const WaitRow& r : rows) {
    out << r.k << ',' << fmt_num(r.t) << ',';
    if (r.has_mean) out << fmt_num(r.mean_wait_s);
    out << ',' << r.n << '\n';
  }
}

void write_energy_stats_csv(const std::string& path,
                            const std::vector<NamedEnergyStats>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "group,n,n_incomplete,mean,median,mode,std_dev\n";
  for (const NamedEnergyStats& r : rows) {
    out << r.group << ',' << r.stats.n << ',' << r.stats.n_incomplete << ','
        << fmt_num(r.stats.mean) << ',' << fmt_num(r.stats.median) << ','
        << fmt_num(r.stats.mode) << ',' << fmt_num(r.stats.std_dev) << '\n';
  }
}

void run_experiment(const ExperimentConfig& base, Scenario scenario,
                    RunMode mode, const std::string& out_dir,
                    const std::string& qtable_path) {
  ExperimentConfig cfg = base;
  cfg.sim.p_av = scenario == Scenario::Mixed50 ? 0.5 : 0.0;
  cfg.validate();
  std::filesystem::create_directories(out_dir);
  const auto path = [&](const char* name) { return out_dir + "/" + name; };

  QTable table(cfg.learner.n_actions());
  if (mode == RunMode::Train) {
    TrainResult tr = train(cfg);
    write_training_csv(path("training.csv"), tr.curve);
    save_qtable_csv(path("qtable.csv"), tr.table, cfg.learner.bucket_count,
                    cfg.ix.d_a);
    table = std::move(tr.table);
  } else if (!qtable_path.empty()) {
    table = load_qtable_csv(qtable_path, cfg.learner.n_actions(),
                            cfg.learner.bucket_count, cfg.ix.d_a);
  }

  const std::uint64_t eval_seed = derive_seed(cfg.sim.seed, "eval");
  const EvalResult ev = evaluate_policy(cfg, table, eval_seed);

  write_vehicles_csv(path("vehicles.csv"), ev.vehicles);
  write_blocks_csv(path("blocks.csv"), ev.blocks);
  const long n_blocks = static_cast<long>(ev.blocks.size());
  write_waiting_csv(path("waiting.csv"),
                    waiting_time_rows(ev.vehicles, cfg.ix, n_blocks));

  std::vector<double> av_e, hdv_e;
  for (const VehicleRecord& r : ev.vehicles)
    (r.kind == VehicleKind::AV ? av_e : hdv_e).push_back(r.energy);
  std::vector<NamedEnergyStats> groups;
  if (scenario == Scenario::Mixed50) {
    if (!av_e.empty())
      groups.push_back({"AV_mixed", energy_stats(av_e, ev.incomplete_av)});
    if (!hdv_e.empty())
      groups.push_back({"HDV_mixed", energy_stats(hdv_e, ev.incomplete_hdv)});
  } else if (!hdv_e.empty()) {
    groups.push_back({"HDV_only", energy_stats(hdv_e, ev.incomplete_hdv)});
  }
  write_energy_stats_csv(path("energy_stats.csv"), groups);

  nlohmann::ordered_json j;
  j["scenario"] = scenario_name(scenario);
  j["mode"] = mode == RunMode::Train ? "train" : "eval";
  j["eval_seed"] = eval_seed;
  j["n_blocks"] = n_blocks;
  j["config"] = nlohmann::ordered_json::parse(config_to_json(cfg));
  j["counters"] = {{"spawned", ev.counters.spawned},
                   {"exited", ev.counters.exited},
                   {"dropped_capacity", ev.counters.dropped_capacity},
                   {"dropped_jam", ev.counters.dropped_jam},
                   {"red_entries", ev.counters.red_entries}};
  nlohmann::ordered_json jg = nlohmann::ordered_json::object();
  for (const NamedEnergyStats& g : groups) {
    jg[g.group] = {{"n", g.stats.n},
                   {"n_incomplete", g.stats.n_incomplete},
                   {"mean", g.stats.mean},
                   {"median", g.stats.median},
                   {"mode", g.stats.mode},
                   {"std_dev", g.stats.std_dev}};
  }
  j["energy_groups"] = jg;
  std::ofstream out(path("summary.json"));
  if (!out) throw std::runtime_error("cannot open for writing: summary.json");
  out << j.dump(2) << '\n';
}

}  // namespace crossim
