// SPDX-License-Identifier: Apache-2.0
// risdmimo: Monte Carlo sweeps, plot data and self-checks.

#include "risdmimo/config.hpp"
#include "risdmimo/harness.hpp"
#include "risdmimo/validation.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <iostream>

using namespace risdmimo;

namespace {

int fail(const std::string& kind, const std::string& what, int code) {
  nlohmann::json j = {{"error", kind}, {"message", what}};
  std::cerr << j.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RIS-assisted distributed MIMO energy-efficiency simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out";
  std::size_t threads = 1, drops = 0;
  bool strict = false;
  auto* run = app.add_subcommand("run", "Run a seeded Monte Carlo sweep");
  run->add_option("-c,--config", config_path, "JSON experiment config")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--out", out_dir, "Output directory");
  run->add_option("-j,--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  run->add_option("-n,--drops", drops, "Override the drop count");
  run->add_flag("--strict", strict, "Exit nonzero if any drop is infeasible");

  std::string table_path, figure, fig_out = "plots";
  auto* figs = app.add_subcommand("figures", "Turn a summary table into per-curve CSV series");
  figs->add_option("-t,--table", table_path, "summary.csv from `run`")->required()->check(CLI::ExistingFile);
  figs->add_option("-f,--figure", figure, "fig2, fig3, fig4 or fig5")->required();
  figs->add_option("-o,--out", fig_out, "Output directory");

  std::uint64_t seed = 1;
  std::size_t val_drops = 10;
  auto* val = app.add_subcommand("validate", "Run the invariant self-checks");
  val->add_option("-s,--seed", seed, "Seed");
  val->add_option("-n,--drops", val_drops, "Drops for the AO monotonicity check");

  std::string ch_config, ch_out = "channels";
  std::size_t ch_drop = 0;
  auto* chan = app.add_subcommand("channels", "Export one drop's channels as .npy files");
  chan->add_option("-c,--config", ch_config, "JSON experiment config")->check(CLI::ExistingFile);
  chan->add_option("-d,--drop", ch_drop, "Drop index");
  chan->add_option("-o,--out", ch_out, "Output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      ExperimentConfig cfg = load_config(config_path);
      if (drops > 0) cfg.drops = drops;
      const auto t0 = std::chrono::steady_clock::now();
      const SweepResult res = run_sweep(cfg, threads);
      write_outputs(res, out_dir);
      std::size_t bad = 0;
      for (const auto& s : res.summaries) bad += s.infeasible;
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      std::cout << res.points.size() << " points x " << cfg.drops << " drops in " << secs << " s, " << bad
                << " infeasible rows, written to " << out_dir << '\n';
      if (strict && bad > 0) return fail("infeasible", std::to_string(bad) + " infeasible drop rows", 3);
    } else if (*figs) {
      for (const auto& f : emit_plot_data(read_table_file(table_path), figure, fig_out)) std::cout << f << '\n';
    } else if (*val) {
      bool ok = true;
      for (const auto& c : run_invariant_suite(seed, val_drops)) {
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
        ok = ok && c.passed;
      }
      return ok ? 0 : 1;
    } else if (*chan) {
      ExperimentConfig cfg = ch_config.empty() ? ExperimentConfig{} : load_config(ch_config);
      const DropRealization d = realize_drop(cfg.scenario, cfg.channel, drop_seed(cfg.master_seed, ch_drop));
      export_channels(d.channels, ch_out);
      std::cout << "wrote channels of drop " << ch_drop << " to " << ch_out << '\n';
    }
  } catch (const InfeasibleError& e) {
    return fail("infeasible", e.what(), 3);
  } catch (const std::invalid_argument& e) {
    return fail("invalid_argument", e.what(), 2);
  } catch (const std::exception& e) {
    return fail("runtime", e.what(), 1);
  }
  return 0;
}
