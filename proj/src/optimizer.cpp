// SPDX-License-Identifier: Apache-2.0
#include "risdmimo/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <sstream>

namespace risdmimo {
namespace {

constexpr double kLn2 = std::numbers::ln2;
Eigen::Index ix(std::size_t i) { return static_cast<Eigen::Index>(i); }

// ---------------------------------------------------------------------------
// Feasible set: u >= 0 and sum of u^2 over each AP's variables <= P_max.

struct FeasibleSet {
  std::vector<std::vector<Eigen::Index>> groups;  // variable indices per AP
  Eigen::VectorXd cap;

  FeasibleSet(const std::vector<ApPair>& clusters, const Eigen::VectorXd& p_max) : cap(p_max) {
    groups.resize(static_cast<std::size_t>(p_max.size()));
    for (std::size_t k = 0; k < clusters.size(); ++k)
      for (std::size_t t = 0; t < 2; ++t) groups.at(clusters[k][t]).push_back(ix(2 * k + t));
  }

  // Orthant clamp followed by radial scaling is the exact projection onto the
  // intersection of the orthant with an origin-centred ball.
  void project(Eigen::VectorXd& u) const {
    u = u.cwiseMax(0.0);
    for (std::size_t n = 0; n < groups.size(); ++n) {
      double s = 0.0;
      for (auto v : groups[n]) s += u(v) * u(v);
      if (s <= cap(ix(n))) continue;
      double scale = std::sqrt(cap(ix(n)) / s);
      for (int guard = 0; guard < 8; ++guard) {
        double t = 0.0;
        for (auto v : groups[n]) t += (u(v) * scale) * (u(v) * scale);
        if (t <= cap(ix(n))) break;
        scale *= 1.0 - 4.0 * std::numeric_limits<double>::epsilon();
      }
      for (auto v : groups[n]) u(v) *= scale;
    }
  }

  std::vector<bool> active(const Eigen::VectorXd& u, double rel_tol = 1e-9) const {
    std::vector<bool> out(groups.size(), false);
    for (std::size_t n = 0; n < groups.size(); ++n) {
      double s = 0.0;
      for (auto v : groups[n]) s += u(v) * u(v);
      out[n] = !groups[n].empty() && s >= cap(ix(n)) * (1.0 - rel_tol);
    }
    return out;
  }
};

Eigen::VectorXd to_amplitudes(const PowerAllocation& a) {
  Eigen::VectorXd u(ix(2 * a.num_ues()));
  for (std::size_t k = 0; k < a.num_ues(); ++k)
    for (std::size_t t = 0; t < 2; ++t) u(ix(2 * k + t)) = std::sqrt(std::max(a.p(ix(k), ix(t)), 0.0));
  return u;
}

PowerAllocation to_allocation(const Eigen::VectorXd& u) {
  PowerAllocation a;
  const Eigen::Index K = u.size() / 2;
  a.p.resize(K, 2);
  for (Eigen::Index k = 0; k < K; ++k)
    for (Eigen::Index t = 0; t < 2; ++t) a.p(k, t) = u(2 * k + t) * u(2 * k + t);
  return a;
}

// ---------------------------------------------------------------------------
// Concave surrogate built at an expansion point.

enum class Goal { Main, Phase1 };

struct SurrogateModel {
  const PowerProblem* problem = nullptr;
  Goal goal = Goal::Main;
  NuForm form = NuForm::Aggregate;
  std::size_t K = 0;
  Eigen::VectorXd y;
  Eigen::MatrixX2d lin;   // supporting-hyperplane coefficients of |s_k|
  double nu = 0.0;
  Eigen::VectorXd gamma;  // floors (Phase1: targets)
  double mu = 0.0;        // barrier weight

  // Returns nullopt outside the log/barrier domain.
  std::optional<double> evaluate(const Eigen::VectorXd& u, Eigen::VectorXd* grad) const {
    const EffectiveConstants& c = problem->constants;
    const double bw = problem->bandwidth_hz;
    Eigen::VectorXd z(ix(K));
    // e(j, k) = sum_t u_{j,t} D_{t j,k}
    MatrixXcd e(ix(K), ix(K));
    for (std::size_t j = 0; j < K; ++j)
      for (std::size_t k = 0; k < K; ++k)
        e(ix(j), ix(k)) = u(ix(2 * j)) * c.interference[0](ix(j), ix(k)) + u(ix(2 * j + 1)) * c.interference[1](ix(j), ix(k));
    for (std::size_t k = 0; k < K; ++k) {
      double interf = c.noise_var;
      for (std::size_t j = 0; j < K; ++j)
        if (j != k) interf += std::norm(e(ix(j), ix(k)));
      const double yk = y(ix(k));
      z(ix(k)) = 2.0 * yk * (lin(ix(k), 0) * u(ix(2 * k)) + lin(ix(k), 1) * u(ix(2 * k + 1))) - yk * yk * interf;
    }

    Eigen::VectorXd dz = Eigen::VectorXd::Zero(ix(K));  // dF/dz_k
    double f = 0.0;
    if (goal == Goal::Phase1) {
      for (std::size_t k = 0; k < K; ++k) {
        const double gap = std::max(0.0, gamma(ix(k)) - z(ix(k)));
        f -= gap * gap;
        dz(ix(k)) = 2.0 * gap;
      }
    } else {
      const double denom = problem->p_static + u.squaredNorm() / problem->eta_pa;
      for (std::size_t k = 0; k < K; ++k)
        if (1.0 + z(ix(k)) <= 0.0) return std::nullopt;
      if (form == NuForm::Aggregate) {
        double n = 0.0;
        for (std::size_t k = 0; k < K; ++k) n += bw * std::log2(1.0 + z(ix(k)));
        if (!(n > 0.0)) return std::nullopt;
        const double sn = std::sqrt(n);
        f = 2.0 * nu * sn - nu * nu * denom;
        for (std::size_t k = 0; k < K; ++k) dz(ix(k)) = (nu / sn) * bw / (kLn2 * (1.0 + z(ix(k))));
      } else {
        for (std::size_t k = 0; k < K; ++k) {
          if (y(ix(k)) == 0.0) continue;
          if (z(ix(k)) <= 0.0) return std::nullopt;
          const double se = bw * std::log2(1.0 + z(ix(k)));
          const double sq = std::sqrt(se);
          f += 2.0 * nu * sq;
          dz(ix(k)) = 2.0 * nu * (bw / (kLn2 * (1.0 + z(ix(k))))) / (2.0 * sq);
        }
        f -= nu * nu * denom;
      }
      if (mu > 0.0) {
        for (std::size_t k = 0; k < K; ++k) {
          if (!(gamma(ix(k)) > 0.0)) continue;
          const double slack = z(ix(k)) - gamma(ix(k));
          if (slack <= 0.0) return std::nullopt;
          f += mu * std::log(slack);
          dz(ix(k)) += mu / slack;
        }
      }
      if (grad) *grad = -(nu * nu * 2.0 / problem->eta_pa) * u;
    }
    if (grad) {
      if (goal == Goal::Phase1) grad->setZero(u.size());
      for (std::size_t k = 0; k < K; ++k) {
        const double w = dz(ix(k));
        if (w == 0.0) continue;
        const double yk = y(ix(k));
        (*grad)(ix(2 * k)) += w * 2.0 * yk * lin(ix(k), 0);
        (*grad)(ix(2 * k + 1)) += w * 2.0 * yk * lin(ix(k), 1);
        for (std::size_t j = 0; j < K; ++j) {
          if (j == k) continue;
          const cd ej = std::conj(e(ix(j), ix(k)));
          for (std::size_t t = 0; t < 2; ++t)
            (*grad)(ix(2 * j + t)) -= w * 2.0 * yk * yk * std::real(ej * c.interference[t](ix(j), ix(k)));
        }
      }
    }
    return f;
  }
};

struct Expansion {
  Eigen::VectorXd y;
  Eigen::MatrixX2d lin;
  Eigen::VectorXd se;  // true SE (= surrogate SE) at the expansion point
  double nu = 0.0;
};

Expansion expand(const PowerProblem& problem, const PowerAllocation& alloc, NuForm form) {
  const EffectiveConstants& c = problem.constants;
  const std::size_t K = c.num_ues();
  Expansion x;
  x.y = mm_auxiliary_y(alloc, c);
  x.lin = Eigen::MatrixX2d::Zero(ix(K), 2);
  x.se.resize(ix(K));
  for (std::size_t k = 0; k < K; ++k) {
    const cd s = std::sqrt(alloc.p(ix(k), 0)) * c.desired(ix(k), 0) + std::sqrt(alloc.p(ix(k), 1)) * c.desired(ix(k), 1);
    const double mag = std::abs(s);
    if (mag > 0.0) {
      for (Eigen::Index t = 0; t < 2; ++t) x.lin(ix(k), t) = std::real(std::conj(s) * c.desired(ix(k), t)) / mag;
    }
    x.se(ix(k)) = std::log2(1.0 + sinr(k, alloc, c));
  }
  x.nu = mm_ratio_nu(x.se, problem.bandwidth_hz, problem.total_power(alloc), form);
  return x;
}

struct SpgResult {
  Eigen::VectorXd u;
  double f = 0.0;
  std::size_t iterations = 0;
};

// Spectral projected gradient ascent with Armijo backtracking.
SpgResult spg_maximize(const SurrogateModel& model, const FeasibleSet& set, Eigen::VectorXd u, const SolverSettings& s) {
  Eigen::VectorXd g(u.size());
  auto f0 = model.evaluate(u, &g);
  if (!f0) throw std::logic_error("solve_surrogate: expansion point lies outside the surrogate domain");
  double f = *f0;
  const double gnorm = g.norm();
  SpgResult out{u, f, 0};
  if (!(gnorm > 0.0) || !std::isfinite(gnorm)) return out;
  double alpha = std::max(u.norm(), 1e-12) / gnorm;

  Eigen::VectorXd g_new(u.size());
  for (std::size_t it = 0; it < s.max_solver_iters; ++it) {
    out.iterations = it + 1;
    Eigen::VectorXd trial;
    std::optional<double> f_trial;
    bool moved = false;
    for (int bt = 0; bt < 60; ++bt) {
      trial = u + alpha * g;
      set.project(trial);
      const Eigen::VectorXd step = trial - u;
      if (step.norm() <= 1e-300) break;
      f_trial = model.evaluate(trial, &g_new);
      if (f_trial && *f_trial >= f + 1e-4 * g.dot(step)) {
        moved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!moved) break;
    const Eigen::VectorXd sstep = trial - u;
    const Eigen::VectorXd rstep = g_new - g;
    const double gain = *f_trial - f;
    u = trial;
    g = g_new;
    f = *f_trial;
    if (sstep.norm() <= s.stationarity_tol * std::max(u.norm(), 1e-300) ||
        gain <= s.objective_tol * std::max(std::abs(f), 1e-300)) {
      break;
    }
    const double sr = sstep.dot(rstep);
    alpha = sr < 0.0 ? sstep.squaredNorm() / (-sr) : 2.0 * alpha;
    alpha = std::clamp(alpha, 1e-30, 1e30);
  }
  out.u = u;
  out.f = f;
  return out;
}

Eigen::VectorXd floors_of(const SolverSettings& s, std::size_t K) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(ix(K));
  if (s.gamma_min.size() > 0) {
    if (static_cast<std::size_t>(s.gamma_min.size()) != K)
      throw std::invalid_argument("SolverSettings: gamma_min must have one entry per UE");
    f = s.gamma_min;
  }
  return f;
}

bool floors_met(const PowerAllocation& a, const EffectiveConstants& c, const Eigen::VectorXd& floors, double margin) {
  for (std::size_t k = 0; k < c.num_ues(); ++k) {
    if (floors(ix(k)) > 0.0 && sinr(k, a, c) < floors(ix(k)) * (1.0 + margin)) return false;
  }
  return true;
}

double min_slack(const PowerAllocation& a, const EffectiveConstants& c, const Eigen::VectorXd& floors) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < c.num_ues(); ++k) m = std::min(m, sinr(k, a, c) - floors(ix(k)));
  return c.num_ues() == 0 ? 0.0 : m;
}

// Drives every SINR above its floor by MM on the squared floor violation.
PowerAllocation restore_floors(const PowerProblem& problem, const SolverSettings& s, PowerAllocation a,
                               const Eigen::VectorXd& floors) {
  const FeasibleSet set(problem.clusters, problem.p_max);
  for (int round = 0; round < 60; ++round) {
    if (floors_met(a, problem.constants, floors, s.floor_margin)) return a;
    const Expansion x = expand(problem, a, s.nu_form);
    SurrogateModel m;
    m.problem = &problem;
    m.goal = Goal::Phase1;
    m.K = problem.constants.num_ues();
    m.y = x.y;
    m.lin = x.lin;
    m.gamma = floors * (1.0 + 10.0 * s.floor_margin);
    a = to_allocation(spg_maximize(m, set, to_amplitudes(a), s).u);
  }
  if (floors_met(a, problem.constants, floors, s.floor_margin)) return a;
  throw InfeasibleError("optimize_power: SINR floors cannot be met under the per-AP power caps");
}

}  // namespace

std::string to_string(NuForm f) { return f == NuForm::PerUe ? "per_ue" : "aggregate"; }

NuForm nu_form_from_string(const std::string& s) {
  if (s == "per_ue") return NuForm::PerUe;
  if (s == "aggregate") return NuForm::Aggregate;
  throw std::invalid_argument("unknown nu form '" + s + "'");
}

void SolverSettings::validate() const {
  if (inner_iters < 1 || outer_iters < 1) throw std::invalid_argument("SolverSettings: T and T_outer must be >= 1");
  if (!(epsilon > 0.0)) throw std::invalid_argument("SolverSettings: epsilon must be positive");
  if (gamma_min.size() > 0 && (gamma_min.array() < 0.0).any())
    throw std::invalid_argument("SolverSettings: SINR floors must be nonnegative");
}

double PowerProblem::ee(const PowerAllocation& a) const {
  return global_ee(sum_se(a, constants), bandwidth_hz, total_power(a));
}

double PowerProblem::cap_residual(const PowerAllocation& a) const {
  const Eigen::VectorXd load = a.per_ap(clusters, num_aps());
  return std::max((load - p_max).maxCoeff(), -a.p.minCoeff());
}

Eigen::VectorXd mm_auxiliary_y(const PowerAllocation& alloc, const EffectiveConstants& c) {
  Eigen::VectorXd y(ix(c.num_ues()));
  for (std::size_t k = 0; k < c.num_ues(); ++k) {
    const double a = std::max(desired_power(alloc.p(ix(k), 0), alloc.p(ix(k), 1), k, c), 0.0);
    const double b = interference_power(k, alloc, c);
    if (!(b > 0.0)) throw std::invalid_argument("mm_auxiliary_y: interference-plus-noise must be positive");
    y(ix(k)) = std::sqrt(a) / b;
  }
  return y;
}

double surrogate_se(double a, double b, double y) {
  const double arg = 1.0 + 2.0 * y * std::sqrt(std::max(a, 0.0)) - y * y * b;
  if (arg <= 0.0) {
    std::cerr << "surrogate_se: nonpositive argument " << arg << " clamped to the feasibility boundary\n";
    return 0.0;
  }
  return std::log2(arg);
}

Eigen::VectorXd surrogate_se(const PowerAllocation& alloc, const Eigen::VectorXd& y, const EffectiveConstants& c) {
  Eigen::VectorXd out(ix(c.num_ues()));
  for (std::size_t k = 0; k < c.num_ues(); ++k) {
    const double a = desired_power(alloc.p(ix(k), 0), alloc.p(ix(k), 1), k, c);
    out(ix(k)) = surrogate_se(a, interference_power(k, alloc, c), y(ix(k)));
  }
  return out;
}

double mm_ratio_nu(const Eigen::VectorXd& ses, double bandwidth_hz, double p_total, NuForm form) {
  if (!(p_total > 0.0)) throw std::invalid_argument("mm_ratio_nu: total power must be positive");
  if (form == NuForm::Aggregate) return std::sqrt(bandwidth_hz * std::max(ses.sum(), 0.0)) / p_total;
  double acc = 0.0;
  for (Eigen::Index k = 0; k < ses.size(); ++k) acc += std::sqrt(bandwidth_hz * std::max(ses(k), 0.0));
  return acc / p_total;
}

SurrogateResult solve_surrogate(const MmState& state, const PowerProblem& problem, const SolverSettings& s) {
  const std::size_t K = problem.constants.num_ues();
  const FeasibleSet set(problem.clusters, problem.p_max);
  const Eigen::VectorXd floors = floors_of(s, K);
  SurrogateResult out;

  const Expansion x = expand(problem, state.allocation, s.nu_form);
  if ((x.y.array() == 0.0).all()) {
    // No UE can be served: every watt only adds to P_PA.
    if (s.has_floors()) throw InfeasibleError("solve_surrogate: SINR floors set but every desired channel is zero");
    out.allocation.p = Eigen::MatrixX2d::Zero(ix(K), 2);
    out.active_caps = set.active(Eigen::VectorXd::Zero(ix(2 * K)));
    return out;
  }

  SurrogateModel m;
  m.problem = &problem;
  m.form = s.nu_form;
  m.K = K;
  m.y = x.y;
  m.lin = x.lin;
  m.nu = x.nu;
  m.gamma = floors;

  Eigen::VectorXd u = to_amplitudes(state.allocation);
  set.project(u);
  out.objective_in = *m.evaluate(u, nullptr);

  if (s.has_floors()) {
    if (!floors_met(state.allocation, problem.constants, floors, 0.0))
      throw InfeasibleError("solve_surrogate: expansion point violates the SINR floors");
    const double scale = std::max(std::abs(out.objective_in), 1e-300);
    std::size_t n_floor = static_cast<std::size_t>((floors.array() > 0.0).count());
    for (double mu = 1e-2 * scale / static_cast<double>(n_floor); mu > 1e-11 * scale; mu *= 0.1) {
      m.mu = mu;
      if (!m.evaluate(u, nullptr)) break;  // expansion point on the boundary
      const SpgResult r = spg_maximize(m, set, u, s);
      u = r.u;
      out.iterations += r.iterations;
    }
    m.mu = 0.0;
  } else {
    const SpgResult r = spg_maximize(m, set, u, s);
    u = r.u;
    out.iterations = r.iterations;
  }
  out.objective_out = *m.evaluate(u, nullptr);
  out.allocation = to_allocation(u);
  out.active_caps = set.active(u);
  return out;
}

namespace {

enum class LinkRule { Strongest, Leakage };

// Every UE keeps one of its two links, chosen by desired gain alone or by
// desired gain over noise plus the leakage that link causes at the other UEs.
// Each AP splits its budget equally over the links it keeps.
PowerAllocation single_link_start(const PowerProblem& problem, LinkRule rule) {
  const EffectiveConstants& c = problem.constants;
  const std::size_t K = c.num_ues();
  std::vector<int> pick(K, 0);
  for (std::size_t k = 0; k < K; ++k) {
    double score[2];
    for (int t = 0; t < 2; ++t) {
      const auto kk = static_cast<Eigen::Index>(k);
      score[t] = std::norm(c.desired(kk, t));
      if (rule == LinkRule::Leakage) {
        const double p = problem.p_max(static_cast<Eigen::Index>(problem.clusters[k][t]));
        double leak = 0.0;
        for (std::size_t j = 0; j < K; ++j)
          if (j != k) leak += std::norm(c.interference[t](kk, static_cast<Eigen::Index>(j)));
        score[t] /= c.noise_var / std::max(p, 1e-300) + leak;
      }
    }
    pick[k] = score[1] > score[0] ? 1 : 0;
  }
  std::vector<std::size_t> load(problem.num_aps(), 0);
  for (std::size_t k = 0; k < K; ++k) ++load[problem.clusters[k][pick[k]]];
  PowerAllocation a;
  a.p = Eigen::MatrixX2d::Zero(static_cast<Eigen::Index>(K), 2);
  for (std::size_t k = 0; k < K; ++k) {
    const std::size_t n = problem.clusters[k][pick[k]];
    a.p(static_cast<Eigen::Index>(k), pick[k]) = problem.p_max(static_cast<Eigen::Index>(n)) / static_cast<double>(load[n]);
  }
  return a;
}

MmState mm_from(const PowerProblem& problem, const SolverSettings& s, const PowerAllocation& init) {
  const std::size_t K = problem.constants.num_ues();
  const Eigen::VectorXd floors = floors_of(s, K);

  MmState st;
  st.allocation = init;
  if (s.has_floors() && !floors_met(init, problem.constants, floors, s.floor_margin))
    st.allocation = restore_floors(problem, s, init, floors);

  double ee = problem.ee(st.allocation);
  st.ee_trace.push_back(ee);
  for (std::size_t t = 0; t < s.inner_iters; ++t) {
    const Expansion x = expand(problem, st.allocation, s.nu_form);
    st.y = x.y;
    st.nu = x.nu;
    const SurrogateResult r = solve_surrogate(st, problem, s);
    ++st.iteration;
    const double ee_new = problem.ee(r.allocation);
    TraceRow row;
    row.inner = t;
    row.surrogate = r.objective_out;
    row.ee = ee_new;
    row.cap_residual = problem.cap_residual(r.allocation);
    row.sinr_slack = min_slack(r.allocation, problem.constants, floors);
    st.rows.push_back(row);
    if (ee_new < ee) break;  // only reachable through round-off; keep the incumbent
    const double gain = ee_new - ee;
    st.allocation = r.allocation;
    st.surrogate_value = r.objective_out;
    st.active_caps = r.active_caps;
    st.ee_trace.push_back(ee_new);
    ee = ee_new;
    if (gain <= s.inner_tol * std::max(std::abs(ee), 1e-300)) break;
  }
  if (st.active_caps.empty()) st.active_caps = FeasibleSet(problem.clusters, problem.p_max).active(to_amplitudes(st.allocation));
  return st;
}

}  // namespace

MmState optimize_power(const PowerProblem& problem, const SolverSettings& s, const PowerAllocation& init) {
  s.validate();
  const std::size_t K = problem.constants.num_ues();
  if (init.num_ues() != K || problem.clusters.size() != K)
    throw std::invalid_argument("optimize_power: allocation, clusters and constants disagree on K");
  if (problem.cap_residual(init) > 1e-12 * std::max(problem.p_max.maxCoeff(), 1.0))
    throw std::invalid_argument("optimize_power: initial allocation violates nonnegativity or per-AP caps");

  MmState best = mm_from(problem, s, init);
  if (!s.link_restarts || K == 0) return best;
  const double ee0 = best.ee_trace.front();
  double best_ee = problem.ee(best.allocation);
  for (const LinkRule rule : {LinkRule::Strongest, LinkRule::Leakage}) {
    MmState st;
    try {
      st = mm_from(problem, s, single_link_start(problem, rule));
    } catch (const InfeasibleError&) {
      continue;  // floors unreachable from this start
    }
    const double e = problem.ee(st.allocation);
    if (e > best_ee && e >= ee0) {
      // Report the ascent from the caller's point, not from the restart.
      std::vector<double> trace{ee0};
      for (double v : st.ee_trace)
        if (v >= trace.back()) trace.push_back(v);
      st.ee_trace = std::move(trace);
      best = std::move(st);
      best_ee = e;
    }
  }
  return best;
}

Eigen::VectorXd align_phases(const VectorXcd& g, const VectorXcd& incident, double reference) {
  if (g.size() != incident.size()) throw std::invalid_argument("align_phases: size mismatch");
  Eigen::VectorXd th(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) th(i) = wrap_phase(-std::arg(std::conj(g(i)) * incident(i)) + reference);
  return th;
}

RisPhaseUpdate optimize_ris_phases(std::size_t k, const ScenarioInstance& scenario, const ChannelSet& channels,
                                   const PrecoderSet& precoders, const PowerAllocation& alloc, const RisConfig& current,
                                   const SolverSettings& s) {
  RisPhaseUpdate out;
  if (channels.num_ris == 0) return out;
  const std::size_t m = scenario.ris_assoc.at(k);
  out.ris = m;
  out.phases = current.phases.at(m);

  const ApPair& aps = scenario.clusters.at(k);
  const VectorXcd& g = channels.g(m, k);
  const VectorXcd& q1 = precoders.q.at(k)[0];
  const VectorXcd& q2 = precoders.q.at(k)[1];
  const cd direct1 = (channels.r(aps[0], k) * q1)(0);
  const cd direct2 = (channels.r(aps[1], k) * q2)(0);
  const VectorXcd inc1 = channels.H(aps[0], m) * q1;
  const VectorXcd inc2 = channels.H(aps[1], m) * q2;

  // Co-phase every element with the direct part of the received amplitude.
  // The incident signals are weighted by the serving amplitudes so that the
  // update is the per-element optimum for the loaded powers; with a single
  // serving AP this is the plain alignment to r_1 q_1.
  double w1 = std::sqrt(std::max(alloc.p(ix(k), 0), 0.0));
  double w2 = std::sqrt(std::max(alloc.p(ix(k), 1), 0.0));
  if (!s.ris_power_weighted || (w1 == 0.0 && w2 == 0.0)) w1 = w2 = 1.0;
  const cd direct = s.ris_power_weighted ? w1 * direct1 + w2 * direct2 : direct1;
  const double reference = std::abs(direct) > 0.0 ? std::arg(direct) : 0.0;
  const VectorXcd incident = w1 * inc1 + w2 * inc2;

  auto received = [&](const Eigen::VectorXd& th) {
    cd c1 = 0.0, c2 = 0.0;
    for (Eigen::Index i = 0; i < th.size(); ++i) {
      const cd w = std::conj(g(i)) * std::polar(1.0, th(i));
      c1 += w * inc1(i);
      c2 += w * inc2(i);
    }
    return alloc.p(ix(k), 0) * (std::norm(direct1) + std::norm(c1)) + alloc.p(ix(k), 1) * (std::norm(direct2) + std::norm(c2));
  };

  double prev = received(out.phases);
  for (std::size_t sweep = 0; sweep < s.ris_max_sweeps; ++sweep) {
    out.sweeps = sweep + 1;
    out.phases = align_phases(g, incident, reference);
    out.received_power = received(out.phases);
    if (std::abs(out.received_power - prev) <= s.ris_tol * std::max(std::abs(prev), 1e-300)) break;
    prev = out.received_power;
  }
  return out;
}

EeReport alternate(const AoProblem& ao, const SolverSettings& s) {
  s.validate();
  if (!ao.scenario || !ao.channels) throw std::invalid_argument("alternate: scenario and channels are required");
  const ScenarioInstance& sc = *ao.scenario;
  const ChannelSet& ch = *ao.channels;

  EeReport rep;
  rep.ris = ao.initial_ris;
  rep.precoders = mrt_precoders(sc, ch, rep.ris);

  PowerProblem pp;
  pp.clusters = sc.clusters;
  pp.p_max = ao.p_max;
  pp.p_static = ao.static_power.p_static();
  pp.eta_pa = ao.eta_pa;
  pp.bandwidth_hz = ao.bandwidth_hz;
  pp.constants = build_constants(sc, ch, rep.ris, ao.offsets, rep.precoders, ao.mode, ao.noise_var, ao.interference_path);

  rep.allocation = ao.init ? *ao.init : equal_power(sc.clusters, ao.p_max);
  double ee = pp.ee(rep.allocation);
  rep.ee_trace.push_back(ee);

  const bool ris_step = ao.optimize_ris && ch.num_ris > 0;
  for (std::size_t outer = 1; outer <= s.outer_iters; ++outer) {
    rep.outer_iterations = outer;
    if (ao.optimize_powers) {
      // Restarts only on the first pass; later passes refine the incumbent.
      SolverSettings pass = s;
      pass.link_restarts = s.link_restarts && outer == 1;
      MmState st = optimize_power(pp, pass, rep.allocation);
      for (auto& row : st.rows) {
        row.outer = outer;
        rep.rows.push_back(row);
      }
      rep.allocation = st.allocation;
      ee = pp.ee(rep.allocation);
    }
    if (ris_step) {
      for (std::size_t k = 0; k < ch.num_ues; ++k) {
        const RisPhaseUpdate upd = optimize_ris_phases(k, sc, ch, rep.precoders, rep.allocation, rep.ris, s);
        // Shared surfaces and the precoder refresh can undo another UE's gain;
        // an update is kept only if the network EE does not drop. A rejected
        // update is retried with the phase move halved.
        bool accepted = false;
        double step = 1.0;
        for (std::size_t tries = 0; tries <= s.ris_backtracks && !accepted; ++tries, step *= 0.5) {
          RisConfig cand = rep.ris;
          for (Eigen::Index i = 0; i < upd.phases.size(); ++i) {
            const double from = rep.ris.phases[upd.ris](i);
            cand.phases[upd.ris](i) = wrap_phase(from + step * (wrap_phase(upd.phases(i) - from + kPi) - kPi));
          }
          PrecoderSet cand_q = mrt_precoders(sc, ch, cand);
          EffectiveConstants cand_c =
              build_constants(sc, ch, cand, ao.offsets, cand_q, ao.mode, ao.noise_var, ao.interference_path);
          const double cand_ee =
              global_ee(sum_se(rep.allocation, cand_c), pp.bandwidth_hz, pp.total_power(rep.allocation));
          if (cand_ee >= ee) {
            rep.ris = std::move(cand);
            rep.precoders = std::move(cand_q);
            pp.constants = std::move(cand_c);
            ee = cand_ee;
            accepted = true;
          }
        }
        if (accepted) ++rep.ris_updates_accepted;
        else ++rep.ris_updates_rejected;
      }
      TraceRow row;
      row.outer = outer;
      row.inner = s.inner_iters;
      row.ee = ee;
      row.surrogate = std::numeric_limits<double>::quiet_NaN();
      row.cap_residual = pp.cap_residual(rep.allocation);
      row.sinr_slack = min_slack(rep.allocation, pp.constants, floors_of(s, ch.num_ues));
      rep.rows.push_back(row);
    }
    const double prev = rep.ee_trace.back();
    rep.ee_trace.push_back(ee);
    if (outer > 1 && ee - prev < s.epsilon * std::abs(prev)) break;
    if (!ao.optimize_powers && !ris_step) break;
  }

  rep.sinr = sinr_all(rep.allocation, pp.constants);
  rep.se = (1.0 + rep.sinr.array()).log() / kLn2;
  rep.sum_se = rep.se.sum();
  rep.power = with_transmit_power(ao.static_power, rep.allocation.total(), ao.eta_pa);
  rep.ee = global_ee(rep.sum_se, ao.bandwidth_hz, rep.power.p_total);
  return rep;
}

}  // namespace risdmimo
