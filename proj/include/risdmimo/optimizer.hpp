// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "risdmimo/channel.hpp"
#include "risdmimo/power.hpp"
#include "risdmimo/scenario.hpp"
#include "risdmimo/signal.hpp"

#include <optional>
#include <string>
#include <vector>

namespace risdmimo {

/// How the fractional (Dinkelbach-like) auxiliary ratio combines the UEs.
enum class NuForm {
  PerUe,      // sum_k sqrt(B * SEq_k) / P_tot
  Aggregate,  // sqrt(B * sum_k SEq_k) / P_tot
};

std::string to_string(NuForm f);
NuForm nu_form_from_string(const std::string& s);

struct SolverSettings {
  std::size_t inner_iters = 40;   // MM iterations per power pass
  std::size_t outer_iters = 10;   // AO iterations
  double epsilon = 1e-4;          // relative EE improvement that ends the AO loop
  double inner_tol = 1e-9;        // relative EE improvement that ends the MM loop
  Eigen::VectorXd gamma_min;      // per-UE linear SINR floors; empty means all zero
  NuForm nu_form = NuForm::Aggregate;
  // Also run MM from two single-link starts (strongest link, least leakage)
  // and keep the best result. In the AO loop only the first pass restarts.
  bool link_restarts = true;

  // Surrogate solver (spectral projected gradient).
  std::size_t max_solver_iters = 400;
  double stationarity_tol = 1e-11;  // relative step length
  double objective_tol = 1e-14;     // relative objective gain
  double floor_margin = 1e-6;       // strict interior margin for SINR floors

  // RIS repeat-until loop.
  std::size_t ris_max_sweeps = 50;
  double ris_tol = 1e-6;
  // Weight each AP's incident signal by its amplitude and align to the
  // combined direct path; false aligns the unweighted sum to AP n1's path.
  bool ris_power_weighted = true;
  // Halvings of a rejected RIS phase move before giving up on that UE.
  // Off by default: it roughly doubles AO time for little gain.
  std::size_t ris_backtracks = 0;

  void validate() const;
  double floor(std::size_t k) const { return gamma_min.size() == 0 ? 0.0 : gamma_min(static_cast<Eigen::Index>(k)); }
  bool has_floors() const { return gamma_min.size() > 0 && (gamma_min.array() > 0.0).any(); }
};

/// Fixed-phase power allocation problem.
struct PowerProblem {
  EffectiveConstants constants;
  std::vector<ApPair> clusters;
  Eigen::VectorXd p_max;  // per AP
  double p_static = 0.0;
  double eta_pa = 1.0;
  double bandwidth_hz = 20e6;

  std::size_t num_aps() const { return static_cast<std::size_t>(p_max.size()); }
  double total_power(const PowerAllocation& a) const { return p_static + a.total() / eta_pa; }
  double ee(const PowerAllocation& a) const;
  /// max over APs of (load - cap), and min of -p; both <= 0 when feasible.
  double cap_residual(const PowerAllocation& a) const;
};

struct TraceRow {
  std::size_t outer = 0;
  std::size_t inner = 0;
  double surrogate = 0.0;
  double ee = 0.0;
  double cap_residual = 0.0;
  double sinr_slack = 0.0;  // min_k (gamma_k - gamma_min_k)
};

struct MmState {
  std::size_t iteration = 0;      // surrogate solves performed
  Eigen::VectorXd y;              // at the last expansion point
  double nu = 0.0;                // at the last expansion point
  PowerAllocation allocation;
  double surrogate_value = 0.0;   // surrogate objective at `allocation`
  std::vector<double> ee_trace;   // true EE at every accepted iterate, starting with the input
  std::vector<bool> active_caps;  // per AP, at `allocation`
  std::vector<TraceRow> rows;
};

/// y_k = sqrt(A_k) / B_k, the maximizer of 2y sqrt(A_k) - y^2 B_k, so that
/// the surrogate touches log2(1 + A_k/B_k) at the expansion point.
Eigen::VectorXd mm_auxiliary_y(const PowerAllocation& alloc, const EffectiveConstants& constants);

/// log2(1 + 2 y sqrt(A) - y^2 B). Nonpositive arguments are clamped to the
/// feasibility boundary (result 0 bits) with a diagnostic on stderr.
double surrogate_se(double a, double b, double y);
Eigen::VectorXd surrogate_se(const PowerAllocation& alloc, const Eigen::VectorXd& y, const EffectiveConstants& constants);

/// PerUe: sum_k sqrt(B * SEq_k) / P_tot. Aggregate: sqrt(B * sum_k SEq_k) / P_tot.
double mm_ratio_nu(const Eigen::VectorXd& surrogate_ses, double bandwidth_hz, double p_total, NuForm form = NuForm::PerUe);

struct SurrogateResult {
  PowerAllocation allocation;
  double objective_in = 0.0;
  double objective_out = 0.0;
  std::size_t iterations = 0;
  std::vector<bool> active_caps;
};

/// Maximizes the concave surrogate built at `state.allocation`, in amplitude
/// variables u = sqrt(p), with the desired amplitude |sum_t u_t C_t| replaced
/// by its supporting hyperplane at the expansion point.
SurrogateResult solve_surrogate(const MmState& state, const PowerProblem& problem, const SolverSettings& settings);

/// MM iterations y -> nu -> surrogate solve from `init`, nondecreasing true EE.
/// With `link_restarts` the result is the best of several starts and never
/// below the EE reached from `init`.
MmState optimize_power(const PowerProblem& problem, const SolverSettings& settings, const PowerAllocation& init);

/// theta_i = -arg(conj(g_i) * incident_i) + reference, wrapped to [0, 2pi).
Eigen::VectorXd align_phases(const VectorXcd& g, const VectorXcd& incident, double reference);

struct RisPhaseUpdate {
  std::size_t ris = kNoRis;
  Eigen::VectorXd phases;
  double received_power = 0.0;  // P_k^rx
  std::size_t sweeps = 0;
};

/// Closed-form phases of RIS m_k for UE k with precoders and powers held fixed:
/// every reflected element is co-phased with the direct part of UE k's
/// received amplitude. Channels are used without oscillator offsets.
RisPhaseUpdate optimize_ris_phases(std::size_t k, const ScenarioInstance& scenario, const ChannelSet& channels,
                                   const PrecoderSet& precoders, const PowerAllocation& alloc, const RisConfig& current,
                                   const SolverSettings& settings);

/// Everything the AO loop needs for one drop.
struct AoProblem {
  const ScenarioInstance* scenario = nullptr;
  const ChannelSet* channels = nullptr;
  PhaseOffsets offsets;
  RisConfig initial_ris;
  Reception mode = Reception::Coherent;
  InterferencePath interference_path = InterferencePath::Victim;
  Eigen::VectorXd p_max;
  PowerBreakdown static_power;
  double eta_pa = 0.4;
  double bandwidth_hz = 20e6;
  double noise_var = 0.0;
  bool optimize_powers = true;
  bool optimize_ris = true;
  std::optional<PowerAllocation> init;  // equal power when absent
};

struct EeReport {
  PowerAllocation allocation;
  RisConfig ris;
  PrecoderSet precoders;
  Eigen::VectorXd sinr;
  Eigen::VectorXd se;
  double sum_se = 0.0;
  double ee = 0.0;
  PowerBreakdown power;
  std::vector<double> ee_trace;  // initial point, then one value per outer iteration
  std::size_t outer_iterations = 0;
  std::size_t ris_updates_accepted = 0;
  std::size_t ris_updates_rejected = 0;
  std::vector<TraceRow> rows;
};

/// Alternates MM power allocation and per-UE RIS phase updates until the
/// relative EE gain drops below epsilon or the outer budget is spent.
EeReport alternate(const AoProblem& problem, const SolverSettings& settings);

}  // namespace risdmimo
