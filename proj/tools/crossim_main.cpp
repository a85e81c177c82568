#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "crossim/config.hpp"
#include "crossim/engine.hpp"
#include "crossim/learner.hpp"
#include "crossim/metrics.hpp"
#include "crossim/planner.hpp"
#include "crossim/report.hpp"

namespace {

using namespace crossim;

ExperimentConfig make_config(const std::string& config_path,
                             const std::optional<std::uint64_t>& seed,
                             const std::optional<double>& horizon_s,
                             const std::optional<int>& episodes) {
  ExperimentConfig cfg =
      config_path.empty() ? ExperimentConfig{} : load_config(config_path);
  if (seed) cfg.sim.seed = *seed;
  if (horizon_s) cfg.sim.horizon_s = *horizon_s;
  if (episodes) cfg.learner.episodes = *episodes;
  cfg.validate();
  return cfg;
}

int run_plan(const ExperimentConfig& cfg, double t0, double p0, double v0,
             const std::string& color, bool amber, const std::string& out) {
  PlanRequest req;
  req.t_now = t0;
  req.p_now = p0;
  req.v_now = v0;
  req.amber_applies = amber;
  req.cfg = cfg.ix;

  std::optional<TrajectoryPlan> plan;
  if (color == "green") {
    req.announced = AnnouncedColor::Green;
    plan = plan_green(req, cfg.planner.weights, cfg.planner.solver);
  } else if (color == "red") {
    req.announced = AnnouncedColor::Red;
    plan = plan_red(req, cfg.planner.weights, cfg.planner.solver);
    if (!plan) {
      std::cerr << "no stopping plan: the vehicle is already past the stop "
                   "point\n";
      return 1;
    }
  } else {
    std::cerr << "--color must be green or red\n";
    return 2;
  }

  std::ostringstream os;
  os << "t,u,v,p\n";
  for (const PlanRow& row : plan_table(*plan, req))
    os << fmt_num(row.t) << ',' << fmt_num(row.u) << ',' << fmt_num(row.v)
       << ',' << fmt_num(row.p) << '\n';
  if (out.empty()) {
    std::cout << os.str();
  } else {
    std::ofstream f(out);
    if (!f) {
      std::cerr << "cannot open for writing: " << out << '\n';
      return 1;
    }
    f << os.str();
  }
  std::cerr << "kind=" << (plan->kind == PlanKind::Cross ? "cross" : "stop")
            << " t_terminal=" << fmt_num(plan->t_terminal)
            << " objective=" << fmt_num(plan->objective_value)
            << " terminal_speed=" << fmt_num(plan->terminal_speed) << '\n';
  return 0;
}

int run_stats(const std::string& vehicles_path) {
  std::ifstream in(vehicles_path);
  if (!in) {
    std::cerr << "cannot open: " << vehicles_path << '\n';
    return 1;
  }
  std::string line;
  if (!std::getline(in, line)) {
    std::cerr << "empty file: " << vehicles_path << '\n';
    return 1;
  }
  std::map<std::string, std::vector<double>> by_kind;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::vector<std::string> cells;
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 7) {
      std::cerr << "malformed row: " << line << '\n';
      return 1;
    }
    by_kind[cells[2]].push_back(std::stod(cells[6]));
  }
  std::vector<NamedEnergyStats> rows;
  for (auto& [kind, energies] : by_kind)
    rows.push_back({kind, energy_stats(energies, 0)});
  std::cout << "group,n,n_incomplete,mean,median,mode,std_dev\n";
  for (const NamedEnergyStats& r : rows)
    std::cout << r.group << ',' << r.stats.n << ',' << r.stats.n_incomplete
              << ',' << fmt_num(r.stats.mean) << ',' << fmt_num(r.stats.median)
              << ',' << fmt_num(r.stats.mode) << ','
              << fmt_num(r.stats.std_dev) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Signalized-intersection simulator: delayed-action tabular "
               "Q-learning for the lights, minimum-energy crossing plans for "
               "the automated vehicles."};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> horizon_s;
  std::optional<int> episodes;
  std::string out_dir = "out";
  std::string scenario_str = "mixed50";
  std::string qtable_path;

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "configuration file (key = value)");
    cmd->add_option("--seed", seed, "master seed override");
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--scenario", scenario_str, "mixed50 | hdv-only");
    cmd->add_option("--horizon-s", horizon_s, "evaluation horizon override, s");
  };

  CLI::App* train_cmd = app.add_subcommand(
      "train", "train the signal policy, then roll it out greedily");
  add_common(train_cmd);
  train_cmd->add_option("--episodes", episodes, "training episodes override");

  CLI::App* eval_cmd = app.add_subcommand(
      "eval", "roll a policy out (an untrained table without --qtable)");
  add_common(eval_cmd);
  eval_cmd->add_option("--qtable", qtable_path, "trained q-table CSV");

  double t0 = 0.0, p0 = 0.0, v0 = 10.0;
  std::string color = "green", plan_out;
  bool amber = false;
  CLI::App* plan_cmd = app.add_subcommand(
      "plan", "solve one crossing/stopping plan and print its (t,u,v,p) table");
  plan_cmd->add_option("--config", config_path, "configuration file");
  plan_cmd->add_option("--t0", t0, "planning instant (a block boundary)");
  plan_cmd->add_option("--p0", p0, "position, m");
  plan_cmd->add_option("--v0", v0, "speed, m/s");
  plan_cmd->add_option("--color", color, "announced color: green | red");
  plan_cmd->add_flag("--amber", amber, "announced block opens with amber");
  plan_cmd->add_option("--out", plan_out, "write the table here instead of stdout");

  std::string vehicles_path;
  CLI::App* stats_cmd = app.add_subcommand(
      "stats", "recompute energy statistics from a vehicles.csv");
  stats_cmd->add_option("--vehicles", vehicles_path, "vehicles.csv path")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (train_cmd->parsed() || eval_cmd->parsed()) {
      const ExperimentConfig cfg =
          make_config(config_path, seed, horizon_s, episodes);
      const Scenario sc = scenario_from_string(scenario_str);
      const RunMode mode =
          train_cmd->parsed() ? RunMode::Train : RunMode::Eval;
      run_experiment(cfg, sc, mode, out_dir, qtable_path);
      std::cerr << "artifacts written to " << out_dir << '\n';
      return 0;
    }
    if (plan_cmd->parsed()) {
      const ExperimentConfig cfg = make_config(config_path, seed, horizon_s,
                                               episodes);
      return run_plan(cfg, t0, p0, v0, color, amber, plan_out);
    }
    if (stats_cmd->parsed()) return run_stats(vehicles_path);
  } catch (const CollisionError& e) {
    std::cerr << "collision: " << e.what() << '\n';
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
