#include "crossim/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace crossim {

namespace {

// Sums needed by the linear terminal constraints of the discretized problem.
// With symplectic-Euler dynamics v_{n+1} = v_n + h u_n, p_{n+1} = p_n + h v_{n+1}:
//   v_N = v_0 + h * sum(u_n)
//   p_N = p_0 + N h v_0 + h^2 * sum((N - n) u_n)
struct ConstraintSums {
  double s1;  // sum of (N - n) over n = 0..N-1
  double s2;  // sum of (N - n)^2
};

ConstraintSums constraint_sums(int n) {
  const double dn = n;
  return {dn * (dn + 1.0) / 2.0, dn * (dn + 1.0) * (2.0 * dn + 1.0) / 6.0};
}

struct SolveResult {
  std::vector<double> u;
  double energy = 0.0;
  double over_int = 0.0;       // integral of max(0, v - v_max)
  double under_int = 0.0;      // integral of max(0, -v)
  double violation_max = 0.0;  // largest pointwise speed-bound violation
  double score = 0.0;          // energy plus speed penalties
  double terminal_speed = 0.0;
};

void simulate_speeds(const std::vector<double>& u, double v0, double h,
                     std::vector<double>& v) {
  v.resize(u.size() + 1);
  v[0] = v0;
  for (std::size_t n = 0; n < u.size(); ++n) v[n + 1] = v[n] + h * u[n];
}

// Project `u` onto the affine set matching the terminal position (and, when
// `cv` is set, the terminal speed). The normal equations are 2x2 with
// closed-form coefficients, so this is exact and cheap.
void project_terminal(std::vector<double>& u, double cp,
                      std::optional<double> cv) {
  const int n = static_cast<int>(u.size());
  const auto [s1, s2] = constraint_sums(n);
  double rp = -cp, rv = 0.0;
  for (int i = 0; i < n; ++i) rp += (n - i) * u[i];
  if (cv) {
    rv = -*cv;
    for (double x : u) rv += x;
    const double det = s2 * n - s1 * s1;
    const double lp = (rp * n - s1 * rv) / det;
    const double lv = (s2 * rv - s1 * rp) / det;
    for (int i = 0; i < n; ++i) u[i] -= lp * (n - i) + lv;
  } else {
    const double lp = rp / s2;
    for (int i = 0; i < n; ++i) u[i] -= lp * (n - i);
  }
}

// Remove from the gradient its components along the constraint normals so a
// step along it keeps the terminal conditions satisfied.
void project_gradient(std::vector<double>& g, bool pin_speed) {
  const int n = static_cast<int>(g.size());
  const auto [s1, s2] = constraint_sums(n);
  double rp = 0.0, rv = 0.0;
  for (int i = 0; i < n; ++i) rp += (n - i) * g[i];
  if (pin_speed) {
    for (double x : g) rv += x;
    const double det = s2 * n - s1 * s1;
    const double lp = (rp * n - s1 * rv) / det;
    const double lv = (s2 * rv - s1 * rp) / det;
    for (int i = 0; i < n; ++i) g[i] -= lp * (n - i) + lv;
  } else {
    const double lp = rp / s2;
    for (int i = 0; i < n; ++i) g[i] -= lp * (n - i);
  }
}

double penalized_value(const std::vector<double>& u,
                       const std::vector<double>& v, double h, double vmax,
                       const PenaltyWeights& w) {
  double energy = 0.0, over = 0.0, under = 0.0;
  for (double x : u) energy += x * x;
  for (std::size_t m = 1; m < v.size(); ++m) {
    over += std::max(0.0, v[m] - vmax);
    under += std::max(0.0, -v[m]);
  }
  return 0.5 * h * energy + w.k_vmax * h * over + w.k_vmin * h * under;
}

void penalized_gradient(const std::vector<double>& u,
                        const std::vector<double>& v, double h, double vmax,
                        const PenaltyWeights& w, std::vector<double>& g) {
  const int n = static_cast<int>(u.size());
  g.resize(u.size());
  // v_m depends on u_i exactly for i <= m-1, with dv_m/du_i = h.
  double over_behind = 0.0, under_behind = 0.0;
  for (int i = n - 1; i >= 0; --i) {
    if (v[i + 1] > vmax) over_behind += 1.0;
    if (v[i + 1] < 0.0) under_behind += 1.0;
    g[i] = h * u[i] + w.k_vmax * h * h * over_behind -
           w.k_vmin * h * h * under_behind;
  }
}

// Fixed-horizon solve: N steps from (p0, v0) to position pf (and speed vf when
// given), minimizing control energy with hinge penalties on the speed bounds.
// Projected gradient descent from the minimum-norm feasible control, which is
// already optimal whenever no speed bound activates.
SolveResult solve_fixed(double p0, double v0, double pf,
                        std::optional<double> vf, int n,
                        const IntersectionConfig& cfg, const PenaltyWeights& w,
                        const SolverOptions& opt) {
  const double h = cfg.T_S;
  const double cp = (pf - p0 - n * h * v0) / (h * h);
  std::optional<double> cv;
  if (vf) cv = (*vf - v0) / h;

  std::vector<double> u(static_cast<std::size_t>(n), 0.0);
  project_terminal(u, cp, cv);

  std::vector<double> v, g;
  simulate_speeds(u, v0, h, v);
  double f = penalized_value(u, v, h, cfg.v_max, w);

  double eta = 1.0;
  std::vector<double> trial;
  for (int iter = 0; iter < opt.max_iters; ++iter) {
    penalized_gradient(u, v, h, cfg.v_max, w, g);
    project_gradient(g, cv.has_value());
    double gnorm2 = 0.0;
    for (double x : g) gnorm2 += x * x;
    if (gnorm2 < 1e-18) break;

    bool accepted = false;
    for (int back = 0; back < 60; ++back) {
      trial = u;
      for (int i = 0; i < n; ++i) trial[i] -= eta * g[i];
      simulate_speeds(trial, v0, h, v);
      const double ft = penalized_value(trial, v, h, cfg.v_max, w);
      if (ft <= f - 1e-4 * eta * gnorm2) {
        const double rel_drop = (f - ft) / std::max(1.0, std::abs(ft));
        u.swap(trial);
        f = ft;
        eta = std::min(eta * 1.5, 1e3);
        accepted = true;
        if (rel_drop < opt.rel_tol) iter = opt.max_iters;  // converged
        break;
      }
      eta *= 0.5;
      if (eta < 1e-14) break;
    }
    if (!accepted) break;
    simulate_speeds(u, v0, h, v);
  }

  // Numerical drift from the line search is below 1e-12 but re-projecting
  // keeps the terminal conditions exact.
  project_terminal(u, cp, cv);
  simulate_speeds(u, v0, h, v);

  SolveResult out;
  out.u = std::move(u);
  for (double x : out.u) out.energy += x * x;
  out.energy *= 0.5 * h;
  for (std::size_t m = 1; m < v.size(); ++m) {
    out.over_int += std::max(0.0, v[m] - cfg.v_max) * h;
    out.under_int += std::max(0.0, -v[m]) * h;
    out.violation_max =
        std::max({out.violation_max, v[m] - cfg.v_max, -v[m]});
  }
  out.violation_max = std::max(out.violation_max, 0.0);
  out.score = out.energy + w.k_vmax * out.over_int + w.k_vmin * out.under_int;
  out.terminal_speed = v.back();
  return out;
}

std::int64_t to_step(double t, double h) {
  return static_cast<std::int64_t>(std::llround(t / h));
}

}  // namespace

void PlanRequest::validate() const {
  cfg.validate();
  const double ratio = t_now / cfg.T_RL;
  if (t_now < 0.0 || std::abs(ratio - std::round(ratio)) > 1e-9)
    throw std::invalid_argument("PlanRequest: t_now must be a block boundary");
  if (!(p_now >= 0.0 && p_now < cfg.L_C))
    throw std::invalid_argument("PlanRequest: p_now must lie inside the control zone");
  if (!(v_now >= -1e-9 && v_now <= cfg.v_max + 1e-6))
    throw std::invalid_argument("PlanRequest: v_now out of range");
}

double PlanRequest::window_start() const {
  return t_now + cfg.T_delay() + (amber_applies ? cfg.T_alert : 0.0);
}

double PlanRequest::window_end() const {
  return t_now + cfg.T_delay() + cfg.T_RL;
}

AffineMinEnergy analytic_min_energy(double p0, double v0, double pf, double vf,
                                    double T) {
  if (!(T > 0.0) || !std::isfinite(T))
    throw std::invalid_argument("analytic_min_energy: horizon must be positive");
  // Euler-Lagrange gives an affine control u(t) = a + b t; matching the
  // speed and position increments yields a 2x2 linear system.
  const double dv = vf - v0;
  const double dp = pf - p0 - v0 * T;
  const double det = T * (T * T * T / 6.0) - (T * T / 2.0) * (T * T / 2.0);
  AffineMinEnergy r;
  r.a = (dv * T * T * T / 6.0 - dp * T * T / 2.0) / det;
  r.b = (dp * T - dv * T * T / 2.0) / det;
  r.objective =
      0.5 * (r.a * r.a * T + r.a * r.b * T * T + r.b * r.b * T * T * T / 3.0);
  return r;
}

AffineMinEnergy analytic_min_energy_free_vf(double p0, double v0, double pf,
                                            double T) {
  if (!(T > 0.0) || !std::isfinite(T))
    throw std::invalid_argument("analytic_min_energy_free_vf: horizon must be positive");
  // Free terminal speed adds the transversality condition u(T) = 0, so
  // u(t) = a (1 - t/T) with one coefficient fixed by the position increment.
  const double dp = pf - p0 - v0 * T;
  AffineMinEnergy r;
  r.a = 3.0 * dp / (T * T);
  r.b = -r.a / T;
  r.objective = 0.5 * r.a * r.a * T / 3.0;
  return r;
}

TrajectoryPlan plan_green(const PlanRequest& req, const PenaltyWeights& w,
                          const SolverOptions& opt) {
  req.validate();
  if (req.announced != AnnouncedColor::Green)
    throw std::invalid_argument("plan_green: announcement is not green");
  const IntersectionConfig& cfg = req.cfg;
  const double h = cfg.T_S;
  const double dist = cfg.L_C - req.p_now;

  // Crossing-time candidates on the T_S grid, inside the announced block but
  // one step short of its end so the crossing instant itself is still green.
  const int n_lo = static_cast<int>(std::llround(
      (cfg.T_delay() + (req.amber_applies ? cfg.T_alert : 0.0)) / h));
  const int n_hi =
      static_cast<int>(std::llround((cfg.T_delay() + cfg.T_RL) / h)) - 1;
  if (n_lo < 2 || n_hi < n_lo)
    throw InfeasibleWindow("plan_green: empty crossing window");
  if (dist / (n_hi * h) > cfg.v_max + 1.0)
    throw InfeasibleWindow("plan_green: stop line unreachable inside the window");

  std::optional<double> vf;
  if (opt.pin_terminal_speed) vf = cfg.v_max;

  SolveResult best;
  int best_n = -1;
  for (int n = n_lo; n <= n_hi; ++n) {
    SolveResult r = solve_fixed(req.p_now, req.v_now, cfg.L_C, vf, n, cfg, w, opt);
    if (best_n < 0 || r.score < best.score) {
      best = std::move(r);
      best_n = n;
    }
  }
  if (best.violation_max > 10.0 * opt.tol_v)
    throw InfeasibleWindow("plan_green: no candidate respects the speed bounds");

  TrajectoryPlan plan;
  plan.t_start = req.t_now;
  plan.start_step = to_step(req.t_now, h);
  plan.controls = std::move(best.u);
  plan.t_terminal = req.t_now + best_n * h;
  plan.kind = PlanKind::Cross;
  plan.objective_value = best.energy;
  plan.speed_violation = best.over_int;
  plan.terminal_speed = best.terminal_speed;
  return plan;
}

std::optional<TrajectoryPlan> plan_red(const PlanRequest& req,
                                       const PenaltyWeights& w,
                                       const SolverOptions& opt) {
  req.validate();
  if (req.announced != AnnouncedColor::Red)
    throw std::invalid_argument("plan_red: announcement is not red");
  const IntersectionConfig& cfg = req.cfg;
  const double target = cfg.L_C - cfg.delta_a;
  if (req.p_now >= target) return std::nullopt;  // already past the stop point

  const int n = static_cast<int>(std::llround(cfg.T_delay() / cfg.T_S));
  SolveResult r = solve_fixed(req.p_now, req.v_now, target, 0.0, n, cfg, w, opt);

  TrajectoryPlan plan;
  plan.t_start = req.t_now;
  plan.start_step = to_step(req.t_now, cfg.T_S);
  plan.controls = std::move(r.u);
  plan.t_terminal = req.t_now + cfg.T_delay();
  plan.kind = PlanKind::Stop;
  plan.objective_value = r.energy;
  plan.speed_violation = r.over_int;
  plan.terminal_speed = r.terminal_speed;
  return plan;
}

TrajectoryPlan replan_on_green(const TrajectoryPlan& current,
                               const PlanRequest& req, const PenaltyWeights& w,
                               const SolverOptions& opt) {
  if (req.announced == AnnouncedColor::Red) return current;
  if (current.kind != PlanKind::Stop)
    throw std::invalid_argument("replan_on_green: only Stop plans are replanned");
  return plan_green(req, w, opt);
}

bool should_fallback(std::optional<double> leader_gap,
                     const IntersectionConfig& cfg) {
  return leader_gap.has_value() && *leader_gap <= cfg.d_follow;
}

double penalty_objective(const TrajectoryPlan& plan, const PlanRequest& req,
                         const PenaltyWeights& w) {
  const double h = req.cfg.T_S;
  std::vector<double> v;
  simulate_speeds(plan.controls, req.v_now, h, v);
  double f = penalized_value(plan.controls, v, h, req.cfg.v_max, w);
  if (plan.kind == PlanKind::Cross) {
    f += w.k1_tcross * std::max(0.0, req.window_start() - plan.t_terminal);
    f += w.k2_tcross * std::max(0.0, plan.t_terminal - req.window_end());
  }
  return f;
}

std::vector<double> penalty_gradient(const TrajectoryPlan& plan,
                                     const PlanRequest& req,
                                     const PenaltyWeights& w) {
  const double h = req.cfg.T_S;
  std::vector<double> v, g;
  simulate_speeds(plan.controls, req.v_now, h, v);
  penalized_gradient(plan.controls, v, h, req.cfg.v_max, w, g);
  // The window terms depend only on the crossing time, not on the controls.
  return g;
}

std::vector<PlanRow> plan_table(const TrajectoryPlan& plan,
                                const PlanRequest& req) {
  const double h = req.cfg.T_S;
  std::vector<PlanRow> rows;
  rows.reserve(plan.controls.size() + 1);
  double v = req.v_now, p = req.p_now;
  for (std::size_t n = 0; n < plan.controls.size(); ++n) {
    rows.push_back({plan.t_start + n * h, plan.controls[n], v, p});
    v += h * plan.controls[n];
    p += h * v;
  }
  rows.push_back({plan.t_terminal, 0.0, v, p});
  return rows;
}

}  // namespace crossim
