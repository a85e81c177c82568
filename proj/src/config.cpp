#include "crossim/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace crossim {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing");
    return x;
  } catch (const std::exception&) {
    throw ConfigError(key + ": not a number: '" + v + "'");
  }
}

long parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long x = std::stol(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing");
    return x;
  } catch (const std::exception&) {
    throw ConfigError(key + ": not an integer: '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key + ": expected true/false");
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const std::uint64_t x = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing");
    return x;
  } catch (const std::exception&) {
    throw ConfigError(key + ": not an unsigned integer: '" + v + "'");
  }
}

// "1-3,2-4"
std::vector<std::pair<int, int>> parse_pairs(const std::string& key,
                                             const std::string& v) {
  std::vector<std::pair<int, int>> out;
  for (const std::string& item : split(v, ',')) {
    const auto parts = split(item, '-');
    if (parts.size() != 2)
      throw ConfigError(key + ": expected pairs like '1-3,2-4'");
    out.emplace_back(static_cast<int>(parse_int(key, parts[0])),
                     static_cast<int>(parse_int(key, parts[1])));
  }
  return out;
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const std::string& item : split(v, ',')) out.push_back(parse_double(key, item));
  return out;
}

}  // namespace

double Schedule::at(std::uint64_t t) const {
  if (kind == Kind::Constant) return init;
  return std::max(floor, init * std::pow(decay, static_cast<double>(t)));
}

std::string Schedule::describe() const {
  std::ostringstream os;
  if (kind == Kind::Constant) {
    os << "const:" << init;
  } else {
    os << "exp:" << init << ":" << decay << ":" << floor;
  }
  return os.str();
}

Schedule Schedule::parse(const std::string& text) {
  const auto parts = split(text, ':');
  Schedule s;
  if (parts.size() == 2 && parts[0] == "const") {
    s.kind = Kind::Constant;
    s.init = parse_double("schedule", parts[1]);
    return s;
  }
  if (parts.size() == 4 && parts[0] == "exp") {
    s.kind = Kind::ExpDecay;
    s.init = parse_double("schedule", parts[1]);
    s.decay = parse_double("schedule", parts[2]);
    s.floor = parse_double("schedule", parts[3]);
    return s;
  }
  throw ConfigError("schedule: expected 'exp:init:decay:floor' or 'const:value', got '" +
                    text + "'");
}

void LearnerConfig::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("learner.gamma: must lie in (0, 1)");
  if (bucket_width < 1) throw ConfigError("learner.bucket_width: must be positive");
  if (bucket_count < 1) throw ConfigError("learner.bucket_count: must be positive");
  if (episodes < 1) throw ConfigError("learner.episodes: must be positive");
  if (episode_length_blocks < 1)
    throw ConfigError("learner.episode_length_blocks: must be positive");
}

void ExperimentConfig::validate() const {
  ix.validate();
  learner.validate();
  if (!(sim.p_av >= 0.0 && sim.p_av <= 1.0))
    throw ConfigError("sim.p_av: must lie in [0, 1]");
  if (sim.horizon_s < 0.0) throw ConfigError("sim.horizon_s: must be nonnegative");
  if (planner.solver.max_iters < 1)
    throw ConfigError("planner.max_iters: must be positive");
  if (planner.solver.tol_v <= 0.0) throw ConfigError("planner.tol_v: must be positive");
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  bool u_min_hard_set = false;

  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));

    IntersectionConfig& ix = cfg.ix;
    if (key == "n_lanes") ix.n_lanes = static_cast<int>(parse_int(key, val));
    else if (key == "L_M") ix.L_M = parse_double(key, val);
    else if (key == "L_C") ix.L_C = parse_double(key, val);
    else if (key == "L_E") ix.L_E = parse_double(key, val);
    else if (key == "v_max") ix.v_max = parse_double(key, val);
    else if (key == "N_max") ix.N_max = static_cast<int>(parse_int(key, val));
    else if (key == "non_conflicting_pairs") ix.non_conflicting_pairs = parse_pairs(key, val);
    else if (key == "T_S" || key == "sim.t_s") ix.T_S = parse_double(key, val);
    else if (key == "T_RL") ix.T_RL = parse_double(key, val);
    else if (key == "T_alert") ix.T_alert = parse_double(key, val);
    else if (key == "d_a") ix.d_a = static_cast<int>(parse_int(key, val));
    else if (key == "d_follow") ix.d_follow = parse_double(key, val);
    else if (key == "delta_a") ix.delta_a = parse_double(key, val);
    else if (key == "s0") ix.s0 = parse_double(key, val);
    else if (key == "T_headway") ix.T_headway = parse_double(key, val);
    else if (key == "epsilon_idm") ix.epsilon_idm = parse_double(key, val);
    else if (key == "u_max") ix.u_max = parse_double(key, val);
    else if (key == "u_min") ix.u_min = parse_double(key, val);
    else if (key == "u_min_hard") { ix.u_min_hard = parse_double(key, val); u_min_hard_set = true; }
    else if (key == "d_sense") ix.d_sense = parse_double(key, val);
    else if (key == "lambda_arrival" || key == "sim.lambda_per_hour")
      ix.lambda_arrival = parse_double(key, val);
    else if (key == "W") ix.W = parse_list(key, val);
    else if (key == "sim.seed") cfg.sim.seed = parse_u64(key, val);
    else if (key == "sim.p_av") cfg.sim.p_av = parse_double(key, val);
    else if (key == "sim.horizon_s") cfg.sim.horizon_s = parse_double(key, val);
    else if (key == "learner.gamma") cfg.learner.gamma = parse_double(key, val);
    else if (key == "learner.alpha") cfg.learner.alpha = Schedule::parse(val);
    else if (key == "learner.epsilon") cfg.learner.epsilon = Schedule::parse(val);
    else if (key == "learner.bucket_width")
      cfg.learner.bucket_width = static_cast<int>(parse_int(key, val));
    else if (key == "learner.bucket_count")
      cfg.learner.bucket_count = static_cast<int>(parse_int(key, val));
    else if (key == "learner.episodes")
      cfg.learner.episodes = static_cast<int>(parse_int(key, val));
    else if (key == "learner.episode_length_blocks")
      cfg.learner.episode_length_blocks = static_cast<int>(parse_int(key, val));
    else if (key == "learner.allow_all_red") cfg.learner.allow_all_red = parse_bool(key, val);
    else if (key == "planner.k_vmax") cfg.planner.weights.k_vmax = parse_double(key, val);
    else if (key == "planner.k_vmin") cfg.planner.weights.k_vmin = parse_double(key, val);
    else if (key == "planner.k1_tcross") cfg.planner.weights.k1_tcross = parse_double(key, val);
    else if (key == "planner.k2_tcross") cfg.planner.weights.k2_tcross = parse_double(key, val);
    else if (key == "planner.tol_v") cfg.planner.solver.tol_v = parse_double(key, val);
    else if (key == "planner.max_iters")
      cfg.planner.solver.max_iters = static_cast<int>(parse_int(key, val));
    else if (key == "planner.pin_terminal_speed")
      cfg.planner.solver.pin_terminal_speed = parse_bool(key, val);
    else if (key == "planner.plan_scope") {
      if (val == "free") cfg.planner.scope = PlanScope::Free;
      else if (val == "lead_only") cfg.planner.scope = PlanScope::LeadOnly;
      else throw ConfigError(key + ": expected 'free' or 'lead_only'");
    } else {
      throw ConfigError("unknown key: '" + key + "'");
    }
  }

  if (!u_min_hard_set) cfg.ix.u_min_hard = 3.0 * cfg.ix.u_min;
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string config_to_json(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  const IntersectionConfig& ix = cfg.ix;
  j["n_lanes"] = ix.n_lanes;
  j["L_M"] = ix.L_M;
  j["L_C"] = ix.L_C;
  j["L_E"] = ix.L_E;
  j["v_max"] = ix.v_max;
  j["N_max"] = ix.N_max;
  {
    std::vector<std::string> pairs;
    for (const auto& [a, b] : ix.non_conflicting_pairs)
      pairs.push_back(std::to_string(a) + "-" + std::to_string(b));
    j["non_conflicting_pairs"] = pairs;
  }
  j["T_S"] = ix.T_S;
  j["T_RL"] = ix.T_RL;
  j["T_alert"] = ix.T_alert;
  j["d_a"] = ix.d_a;
  j["d_follow"] = ix.d_follow;
  j["delta_a"] = ix.delta_a;
  j["s0"] = ix.s0;
  j["T_headway"] = ix.T_headway;
  j["epsilon_idm"] = ix.epsilon_idm;
  j["u_max"] = ix.u_max;
  j["u_min"] = ix.u_min;
  j["u_min_hard"] = ix.u_min_hard;
  j["d_sense"] = ix.d_sense;
  j["lambda_arrival"] = ix.lambda_arrival;
  j["W"] = ix.W;
  j["sim.seed"] = cfg.sim.seed;
  j["sim.p_av"] = cfg.sim.p_av;
  j["sim.horizon_s"] = cfg.sim.horizon_s;
  j["learner.gamma"] = cfg.learner.gamma;
  j["learner.alpha"] = cfg.learner.alpha.describe();
  j["learner.epsilon"] = cfg.learner.epsilon.describe();
  j["learner.bucket_width"] = cfg.learner.bucket_width;
  j["learner.bucket_count"] = cfg.learner.bucket_count;
  j["learner.episodes"] = cfg.learner.episodes;
  j["learner.episode_length_blocks"] = cfg.learner.episode_length_blocks;
  j["learner.allow_all_red"] = cfg.learner.allow_all_red;
  j["planner.k_vmax"] = cfg.planner.weights.k_vmax;
  j["planner.k_vmin"] = cfg.planner.weights.k_vmin;
  j["planner.k1_tcross"] = cfg.planner.weights.k1_tcross;
  j["planner.k2_tcross"] = cfg.planner.weights.k2_tcross;
  j["planner.tol_v"] = cfg.planner.solver.tol_v;
  j["planner.max_iters"] = cfg.planner.solver.max_iters;
  j["planner.pin_terminal_speed"] = cfg.planner.solver.pin_terminal_speed;
  j["planner.plan_scope"] = cfg.planner.scope == PlanScope::Free ? "free" : "lead_only";
  return j.dump(2);
}

}  // namespace crossim
