// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "risdmimo/channel.hpp"
#include "risdmimo/config.hpp"
#include "risdmimo/optimizer.hpp"
#include "risdmimo/scenario.hpp"

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace risdmimo {

/// Everything random about one Monte Carlo drop.
struct DropRealization {
  ScenarioInstance scenario;
  ChannelSet channels;
  PhaseOffsets offsets;
  RisConfig random_ris;  // also the starting point of RIS optimization
};

std::uint64_t drop_seed(std::uint64_t master_seed, std::size_t drop);

/// Layout, large-scale state, clustering, RIS association and small-scale
/// channels. Throws InfeasibleError when the AP slots cannot host the UEs.
DropRealization realize_drop(const ScenarioParams& scenario, const ChannelParams& channel, std::uint64_t seed);

/// The same drop with every RIS removed.
DropRealization without_ris(const DropRealization& d);

/// One point of the Cartesian sweep.
struct SweepPoint {
  double p_t_dbm = 30.0;
  Reception mode = Reception::Coherent;
  Scheme scheme = Scheme::Opa;
  RisMode ris_mode = RisMode::Opt;
  ControllerSpec controller;
  std::size_t controller_index = 0;  // position on the controller axis
  std::size_t ris_elements = 256;
  std::size_t num_aps = 9;
};

std::vector<SweepPoint> expand_sweep(const ExperimentConfig& cfg);

struct DropOutcome {
  bool feasible = false;
  std::string error;
  std::uint64_t seed = 0;
  double sum_se = 0.0;
  double ee = 0.0;
  double p_total = 0.0;
  double p_static = 0.0;
  double p_pa = 0.0;
  double p_tx = 0.0;
  std::size_t outer_iterations = 0;
  std::size_t trace_violations = 0;  // relative drops larger than 1e-9
  std::vector<double> ee_trace;
  Eigen::VectorXd sinr;
  Eigen::VectorXd se;
  PowerBreakdown power;
};

/// Static power of one point (RIS terms vanish when absent).
PowerBreakdown point_static_power(const ExperimentConfig& cfg, const SweepPoint& pt, std::size_t active_ues);

/// Optimizes and evaluates one point on an already realized drop.
DropOutcome run_point(const ExperimentConfig& cfg, const SweepPoint& pt, const DropRealization& drop);

/// Realizes the drop for `pt` and runs it; infeasibility is flagged in the row.
DropOutcome run_drop(const ExperimentConfig& cfg, const SweepPoint& pt, std::uint64_t seed);

struct PointSummary {
  SweepPoint point;
  std::size_t feasible = 0;
  std::size_t infeasible = 0;
  double sum_se_mean = 0.0, sum_se_stderr = 0.0;
  double ee_mean = 0.0, ee_stderr = 0.0;  // mean of per-drop ratios
  double ee_ratio_of_means = 0.0;         // B * mean(sum_se) / mean(p_total)
  double p_total_mean = 0.0;
};

struct SweepResult {
  ExperimentConfig config;
  std::vector<SweepPoint> points;
  std::vector<std::vector<DropOutcome>> outcomes;  // [point][drop]
  std::vector<PointSummary> summaries;
};

PointSummary summarize(const SweepPoint& pt, const std::vector<DropOutcome>& rows, double bandwidth_hz);

/// Runs every (point, drop) pair; drops sharing a geometry are realized once.
/// Output is independent of `threads`.
SweepResult run_sweep(const ExperimentConfig& cfg, std::size_t threads = 1);

void write_summary_csv(const SweepResult& r, std::ostream& out);
void write_drops_csv(const SweepResult& r, std::ostream& out);
void write_result_json(const SweepResult& r, std::ostream& out);

/// Writes summary.csv, drops.csv and result.json into `dir`.
void write_outputs(const SweepResult& r, const std::string& dir);

/// A CSV table as header plus string cells.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;  // throws if absent
};

Table read_table(std::istream& in);
Table read_table_file(const std::string& path);

/// Writes one CSV per curve (x, y, y_stderr) for fig2..fig5 into `dir` and
/// returns the file names. Throws on a missing axis or an empty table.
std::vector<std::string> emit_plot_data(const Table& summary, const std::string& figure, const std::string& dir);

}  // namespace risdmimo
