// SPDX-License-Identifier: Apache-2.0
#include "risdmimo/harness.hpp"

#include "risdmimo/config.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace risdmimo;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.drops = 4;
  cfg.master_seed = 3;
  cfg.channel.ris_elements = 32;
  return cfg;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST(ExpandSweep, CartesianProductSizes) {
  ExperimentConfig cfg;
  cfg.sweep.p_t_dbm.clear();
  for (int p = -50; p <= 50; p += 10) cfg.sweep.p_t_dbm.push_back(p);
  cfg.sweep.modes = {Reception::Coherent, Reception::NonCoherent};
  cfg.sweep.num_aps = {9, 18};
  EXPECT_EQ(expand_sweep(cfg).size(), 2u * 2u * 11u);
  cfg.sweep.schemes = {Scheme::Opa, Scheme::Epa};
  EXPECT_EQ(expand_sweep(cfg).size(), 2u * 2u * 2u * 11u);

  ExperimentConfig one;
  const auto pts = expand_sweep(one);
  ASSERT_EQ(pts.size(), 1u);
  EXPECT_EQ(pts[0].num_aps, 9u);
  EXPECT_EQ(pts[0].ris_elements, 256u);

  ExperimentConfig ctl;
  ctl.sweep.modes = {Reception::Coherent, Reception::NonCoherent};
  ctl.sweep.controllers = {{ControllerMode::Centralized, 4.8},
                           {ControllerMode::PerRis, 2.8},
                           {ControllerMode::PerRis, 3.8},
                           {ControllerMode::PerRis, 4.8}};
  const auto cp = expand_sweep(ctl);
  EXPECT_EQ(cp.size(), 8u);
  std::set<std::size_t> idx;
  for (const auto& p : cp) idx.insert(p.controller_index);
  EXPECT_EQ(idx.size(), 4u);
}

TEST(RunDrop, DeterministicRows) {
  const ExperimentConfig cfg = small_config();
  SweepPoint pt;
  pt.ris_elements = 32;
  const DropOutcome a = run_drop(cfg, pt, drop_seed(cfg.master_seed, 0));
  const DropOutcome b = run_drop(cfg, pt, drop_seed(cfg.master_seed, 0));
  ASSERT_TRUE(a.feasible) << a.error;
  EXPECT_EQ(a.sum_se, b.sum_se);
  EXPECT_EQ(a.ee, b.ee);
  EXPECT_EQ(a.ee_trace, b.ee_trace);
  EXPECT_EQ(a.trace_violations, 0u);
  EXPECT_NEAR(a.ee, cfg.channel.bandwidth_hz * a.sum_se / a.p_total, 1e-9 * a.ee);
  EXPECT_NEAR(a.p_total, a.p_static + a.p_pa, 1e-12 * a.p_total);
}

TEST(RunPoint, EqualPowerSkipsOptimizer) {
  const ExperimentConfig cfg = small_config();
  const DropRealization d = realize_drop(cfg.scenario, cfg.channel, drop_seed(1, 2));
  SweepPoint pt;
  pt.scheme = Scheme::Epa;
  pt.ris_mode = RisMode::Random;
  pt.ris_elements = 32;
  pt.p_t_dbm = 20.0;
  const DropOutcome o = run_point(cfg, pt, d);
  ASSERT_TRUE(o.feasible);
  // Every AP serving anyone spends its whole budget.
  const auto loads = ap_loads(d.scenario.clusters, 9);
  std::size_t busy = 0;
  for (auto l : loads) busy += l > 0 ? 1 : 0;
  EXPECT_NEAR(o.p_tx, busy * dbm_to_watt(20.0), 1e-12);
  // Random phases with equal power are evaluated as drawn.
  const PrecoderSet q = mrt_precoders(d.scenario, d.channels, d.random_ris);
  const EffectiveConstants c = build_constants(d.scenario, d.channels, d.random_ris, d.offsets, q, Reception::Coherent,
                                               cfg.channel.noise_power_w());
  const PowerAllocation a = equal_power(d.scenario.clusters, Eigen::VectorXd::Constant(9, dbm_to_watt(20.0)));
  EXPECT_NEAR(o.sum_se, sum_se(a, c), 1e-9);
}

TEST(RunPoint, AbsentRisHasNoRisPower) {
  const ExperimentConfig cfg = small_config();
  const DropRealization d = realize_drop(cfg.scenario, cfg.channel, drop_seed(1, 3));
  SweepPoint pt;
  pt.ris_mode = RisMode::Absent;
  pt.ris_elements = 32;
  const DropOutcome o = run_point(cfg, pt, d);
  ASSERT_TRUE(o.feasible);
  EXPECT_DOUBLE_EQ(o.power.p_ris, 0.0);
  pt.ris_mode = RisMode::Opt;
  const DropOutcome w = run_point(cfg, pt, d);
  EXPECT_GT(w.power.p_ris, 0.0);
}

TEST(RunPoint, ImpossibleFloorsAreFlagged) {
  ExperimentConfig cfg = small_config();
  cfg.sinr_min_db = 80.0;
  const DropRealization d = realize_drop(cfg.scenario, cfg.channel, drop_seed(1, 0));
  SweepPoint pt;
  pt.ris_elements = 32;
  const DropOutcome o = run_point(cfg, pt, d);
  EXPECT_FALSE(o.feasible);
  EXPECT_FALSE(o.error.empty());
}

TEST(Summarize, MeansStderrAndRatioOfMeans) {
  std::vector<DropOutcome> rows(4);
  const double se[] = {10.0, 12.0, 14.0, 0.0};
  const double pt[] = {20.0, 25.0, 30.0, 1.0};
  for (int i = 0; i < 4; ++i) {
    rows[i].feasible = i < 3;
    rows[i].sum_se = se[i];
    rows[i].p_total = pt[i];
    rows[i].ee = 2.0 * se[i] / pt[i];
  }
  const PointSummary s = summarize(SweepPoint{}, rows, 2.0);
  EXPECT_EQ(s.feasible, 3u);
  EXPECT_EQ(s.infeasible, 1u);
  EXPECT_DOUBLE_EQ(s.sum_se_mean, 12.0);
  EXPECT_NEAR(s.sum_se_stderr, 2.0 / std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(s.ee_ratio_of_means, 2.0 * 12.0 / 25.0, 1e-12);
  EXPECT_NEAR(s.ee_mean, (1.0 + 24.0 / 25.0 + 28.0 / 30.0) / 3.0, 1e-12);
}

TEST(RunSweep, ThreadCountDoesNotChangeResults) {
  ExperimentConfig cfg = small_config();
  cfg.sweep.p_t_dbm = {0.0, 30.0};
  cfg.sweep.ris_modes = {RisMode::Opt, RisMode::Absent};
  cfg.sweep.ris_elements = {16, 32};
  const SweepResult a = run_sweep(cfg, 1);
  const SweepResult b = run_sweep(cfg, 4);
  std::ostringstream sa, sb, da, db;
  write_summary_csv(a, sa);
  write_summary_csv(b, sb);
  write_drops_csv(a, da);
  write_drops_csv(b, db);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_EQ(da.str(), db.str());
  EXPECT_EQ(a.summaries.size(), 8u);
}

TEST(RunSweep, PointsSharePairedDrops) {
  ExperimentConfig cfg = small_config();
  cfg.sweep.ris_modes = {RisMode::Opt, RisMode::Random};
  const SweepResult r = run_sweep(cfg, 1);
  for (std::size_t d = 0; d < cfg.drops; ++d) EXPECT_EQ(r.outcomes[0][d].seed, r.outcomes[1][d].seed);
}

TEST(Outputs, CsvRoundTripAndPlotData) {
  ExperimentConfig cfg = small_config();
  cfg.drops = 2;
  cfg.sweep.p_t_dbm = {0.0, 20.0};
  cfg.sweep.modes = {Reception::Coherent, Reception::NonCoherent};
  cfg.sweep.schemes = {Scheme::Opa, Scheme::Epa};
  cfg.sweep.ris_modes = {RisMode::Opt, RisMode::Absent};
  const SweepResult r = run_sweep(cfg, 1);
  const auto dir = std::filesystem::temp_directory_path() / "risdmimo_outputs_test";
  std::filesystem::remove_all(dir);
  write_outputs(r, dir.string());
  for (const char* f : {"summary.csv", "drops.csv", "result.json"}) EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;

  const Table t = read_table_file((dir / "summary.csv").string());
  EXPECT_EQ(t.rows.size(), r.summaries.size());
  const std::size_t se = t.column("sum_se_mean");
  EXPECT_NEAR(std::stod(t.rows[0][se]), r.summaries[0].sum_se_mean, 1e-12 * r.summaries[0].sum_se_mean);

  const auto files = emit_plot_data(t, "fig2", (dir / "plots").string());
  // 2 schemes x 2 modes x 2 RIS modes, for EE and SE.
  EXPECT_EQ(files.size(), 16u);
  const std::string one = slurp(dir / "plots" / files[0]);
  EXPECT_EQ(one.substr(0, 12), "x,y,y_stderr");
  EXPECT_THROW(emit_plot_data(t, "fig9", (dir / "plots").string()), std::invalid_argument);
  EXPECT_THROW(emit_plot_data(Table{t.header, {}}, "fig2", (dir / "plots").string()), std::invalid_argument);
  std::filesystem::remove_all(dir);
}

TEST(Outputs, Fig5SeriesPerElementCount) {
  ExperimentConfig cfg = small_config();
  cfg.drops = 1;
  cfg.channel.ris_elements = 8;
  cfg.sweep.p_t_dbm = {10.0, 30.0};
  cfg.sweep.modes = {Reception::Coherent, Reception::NonCoherent};
  cfg.sweep.ris_elements = {8, 16, 32};
  const SweepResult r = run_sweep(cfg, 1);
  std::ostringstream os;
  write_summary_csv(r, os);
  std::istringstream in(os.str());
  const auto dir = std::filesystem::temp_directory_path() / "risdmimo_fig5_test";
  const auto files = emit_plot_data(read_table(in), "fig5", dir.string());
  EXPECT_EQ(files.size(), 3u * 2u * 2u);
  std::filesystem::remove_all(dir);
}

TEST(Config, JsonRoundTripAndFingerprint) {
  ExperimentConfig cfg;
  cfg.drops = 17;
  cfg.sweep.p_t_dbm = {0.0, 10.0};
  cfg.sweep.controllers = {{ControllerMode::PerRis, 2.8}};
  cfg.solver.nu_form = NuForm::PerUe;
  cfg.sinr_min_db = -3.0;
  const std::string text = config_to_json(cfg);
  const ExperimentConfig back = config_from_json(text);
  EXPECT_EQ(config_to_json(back), text);
  EXPECT_EQ(config_fingerprint(back), config_fingerprint(cfg));
  EXPECT_EQ(config_fingerprint(cfg).size(), 16u);
  ExperimentConfig other = cfg;
  other.master_seed = 2;
  EXPECT_NE(config_fingerprint(other), config_fingerprint(cfg));
}

TEST(Config, StrictParsing) {
  EXPECT_THROW(config_from_json(R"({"drops": 10, "bogus": 1})"), std::invalid_argument);
  EXPECT_THROW(config_from_json(R"({"sweep": {"modes": ["X"]}})"), std::invalid_argument);
  EXPECT_THROW(config_from_json(R"({"sweep": {"p_t_dbm": []}})"), std::invalid_argument);
  const ExperimentConfig c = config_from_json(R"({"drops": 10, "sweep": {"modes": ["C", "NC"]}})");
  EXPECT_EQ(c.drops, 10u);
  EXPECT_EQ(c.sweep.modes.size(), 2u);
  EXPECT_EQ(c.scenario.num_aps, 9u);
}
