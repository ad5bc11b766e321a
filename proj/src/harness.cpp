// SPDX-License-Identifier: Apache-2.0
#include "risdmimo/harness.hpp"

#include <json.hpp>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace risdmimo {
namespace {

Eigen::Index ix(std::size_t i) { return static_cast<Eigen::Index>(i); }

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string controller_label(const ControllerSpec& c) { return to_string(c.mode); }

void point_cells(std::ostream& out, std::size_t i, const SweepPoint& p) {
  out << i << ',' << fmt(p.p_t_dbm) << ',' << to_string(p.mode) << ',' << to_string(p.scheme) << ','
      << to_string(p.ris_mode) << ',' << controller_label(p.controller) << ',' << fmt(p.controller.power_w) << ','
      << p.controller_index << ',' << p.ris_elements << ',' << p.num_aps;
}

constexpr const char* kPointHeader =
    "point,p_t_dbm,mode,scheme,ris_mode,controller,controller_power_w,controller_index,ris_elements,num_aps";

struct Geometry {
  std::size_t num_aps;
  std::size_t ris_elements;
  bool operator<(const Geometry& o) const {
    return num_aps != o.num_aps ? num_aps < o.num_aps : ris_elements < o.ris_elements;
  }
};

DropOutcome infeasible_row(std::uint64_t seed, const std::string& why) {
  DropOutcome o;
  o.seed = seed;
  o.feasible = false;
  o.error = why;
  return o;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') quoted = !quoted;
    else if (c == ',' && !quoted) {
      out.push_back(cell);
      cell.clear();
    } else if (c != '\r') {
      cell += c;
    }
  }
  out.push_back(cell);
  return out;
}

}  // namespace

std::uint64_t drop_seed(std::uint64_t master_seed, std::size_t drop) {
  return derive_seed(master_seed, {tag(Stream::Drop), drop});
}

DropRealization realize_drop(const ScenarioParams& sp, const ChannelParams& cp, std::uint64_t seed) {
  DropRealization d;
  d.scenario = draw_layout(sp, seed);
  const LargeScaleSet large = draw_large_scale(d.scenario, cp, seed);
  d.scenario.clusters = cluster_aps(large.direct_gains(), sp.slots_per_ap);
  if (d.scenario.num_ris() > 0) d.scenario.ris_assoc = associate_ris(large.cascade_gains(d.scenario.clusters));
  d.channels = draw_channels(d.scenario, large, cp, seed);
  d.offsets = PhaseOffsets::random(d.scenario.num_aps(), d.scenario.num_active(),
                                   derive_seed(seed, {tag(Stream::PhaseOffsets)}));
  d.random_ris = RisConfig::random(d.scenario.num_ris(), cp.ris_elements, derive_seed(seed, {tag(Stream::RandomRisPhases)}));
  return d;
}

DropRealization without_ris(const DropRealization& d) {
  DropRealization out = d;
  out.scenario.ris_positions.clear();
  out.scenario.ris_assoc.clear();
  out.channels.num_ris = 0;
  out.channels.ap_ris.clear();
  out.channels.ris_ue.clear();
  out.random_ris = RisConfig{};
  return out;
}

std::vector<SweepPoint> expand_sweep(const ExperimentConfig& cfg) {
  std::vector<SweepPoint> pts;
  const auto& a = cfg.sweep;
  for (auto l : cfg.num_ap_axis())
    for (auto n : cfg.ris_element_axis())
      for (std::size_t ci = 0; ci < a.controllers.size(); ++ci)
        for (auto rm : a.ris_modes)
          for (auto sc : a.schemes)
            for (auto mode : a.modes)
              for (double pt : a.p_t_dbm) {
                SweepPoint p;
                p.p_t_dbm = pt;
                p.mode = mode;
                p.scheme = sc;
                p.ris_mode = rm;
                p.controller = a.controllers[ci];
                p.controller_index = ci;
                p.ris_elements = n;
                p.num_aps = l;
                pts.push_back(p);
              }
  return pts;
}

PowerBreakdown point_static_power(const ExperimentConfig& cfg, const SweepPoint& pt, std::size_t active_ues) {
  NetworkSize size;
  size.num_aps = pt.num_aps;
  size.ap_antennas = cfg.channel.ap_antennas;
  size.active_ues = active_ues;
  size.num_ris = pt.ris_mode == RisMode::Absent ? 0 : cfg.scenario.num_ris;
  size.ris_elements = pt.ris_elements;
  size.bandwidth_hz = cfg.channel.bandwidth_hz;
  PowerModelParams pm = cfg.power;
  pm.controller = pt.controller.mode;
  pm.p_ris_ctrl_w = pt.controller.power_w;
  return static_power(size, pm);
}

DropOutcome run_point(const ExperimentConfig& cfg, const SweepPoint& pt, const DropRealization& full) {
  const DropRealization stripped = pt.ris_mode == RisMode::Absent ? without_ris(full) : DropRealization{};
  const DropRealization& d = pt.ris_mode == RisMode::Absent ? stripped : full;
  const std::size_t K = d.scenario.num_active();
  const std::size_t L = d.scenario.num_aps();

  DropOutcome o;
  o.seed = d.scenario.rng_seed;
  SolverSettings s = cfg.solver;
  if (cfg.sinr_min_db) s.gamma_min = Eigen::VectorXd::Constant(ix(K), db_to_linear(*cfg.sinr_min_db));

  AoProblem ao;
  ao.scenario = &d.scenario;
  ao.channels = &d.channels;
  ao.offsets = d.offsets;
  ao.initial_ris = d.random_ris;
  ao.mode = pt.mode;
  ao.interference_path = cfg.interference_path;
  ao.p_max = Eigen::VectorXd::Constant(ix(L), dbm_to_watt(pt.p_t_dbm));
  ao.static_power = point_static_power(cfg, pt, K);
  ao.eta_pa = cfg.power.eta_pa;
  ao.bandwidth_hz = cfg.channel.bandwidth_hz;
  ao.noise_var = cfg.channel.noise_power_w();
  ao.optimize_powers = pt.scheme == Scheme::Opa;
  ao.optimize_ris = pt.ris_mode == RisMode::Opt;

  EeReport rep;
  try {
    rep = alternate(ao, s);
  } catch (const InfeasibleError& e) {
    return infeasible_row(o.seed, e.what());
  }
  if (s.has_floors()) {
    for (std::size_t k = 0; k < K; ++k)
      if (rep.sinr(ix(k)) < s.floor(k)) return infeasible_row(o.seed, "SINR floor not met by the allocation");
  }
  o.feasible = true;
  o.sum_se = rep.sum_se;
  o.ee = rep.ee;
  o.power = rep.power;
  o.p_total = rep.power.p_total;
  o.p_static = rep.power.p_static();
  o.p_pa = rep.power.p_pa;
  o.p_tx = rep.allocation.total();
  o.outer_iterations = rep.outer_iterations;
  o.ee_trace = rep.ee_trace;
  for (std::size_t i = 1; i < o.ee_trace.size(); ++i)
    if (o.ee_trace[i] < o.ee_trace[i - 1] * (1.0 - 1e-9)) ++o.trace_violations;
  o.sinr = rep.sinr;
  o.se = rep.se;
  return o;
}

DropOutcome run_drop(const ExperimentConfig& cfg, const SweepPoint& pt, std::uint64_t seed) {
  ScenarioParams sp = cfg.scenario;
  sp.num_aps = pt.num_aps;
  ChannelParams cp = cfg.channel;
  cp.ris_elements = pt.ris_elements;
  DropRealization d;
  try {
    d = realize_drop(sp, cp, seed);
  } catch (const InfeasibleError& e) {
    return infeasible_row(seed, e.what());
  }
  return run_point(cfg, pt, d);
}

PointSummary summarize(const SweepPoint& pt, const std::vector<DropOutcome>& rows, double bandwidth_hz) {
  PointSummary s;
  s.point = pt;
  double se = 0.0, se2 = 0.0, ee = 0.0, ee2 = 0.0, pt_sum = 0.0;
  for (const auto& r : rows) {
    if (!r.feasible) {
      ++s.infeasible;
      continue;
    }
    ++s.feasible;
    se += r.sum_se;
    ee += r.ee;
    pt_sum += r.p_total;
  }
  if (s.feasible == 0) return s;
  const double n = static_cast<double>(s.feasible);
  s.sum_se_mean = se / n;
  s.ee_mean = ee / n;
  s.p_total_mean = pt_sum / n;
  s.ee_ratio_of_means = bandwidth_hz * s.sum_se_mean / s.p_total_mean;
  for (const auto& r : rows) {
    if (!r.feasible) continue;
    se2 += (r.sum_se - s.sum_se_mean) * (r.sum_se - s.sum_se_mean);
    ee2 += (r.ee - s.ee_mean) * (r.ee - s.ee_mean);
  }
  if (s.feasible > 1) {
    s.sum_se_stderr = std::sqrt(se2 / (n - 1.0) / n);
    s.ee_stderr = std::sqrt(ee2 / (n - 1.0) / n);
  }
  return s;
}

SweepResult run_sweep(const ExperimentConfig& cfg, std::size_t threads) {
  cfg.validate();
  SweepResult res;
  res.config = cfg;
  res.points = expand_sweep(cfg);
  res.outcomes.assign(res.points.size(), std::vector<DropOutcome>(cfg.drops));

  std::map<Geometry, std::vector<std::size_t>> by_geometry;
  for (std::size_t i = 0; i < res.points.size(); ++i)
    by_geometry[{res.points[i].num_aps, res.points[i].ris_elements}].push_back(i);
  std::vector<std::pair<Geometry, std::vector<std::size_t>>> groups(by_geometry.begin(), by_geometry.end());

  const std::size_t tasks = groups.size() * cfg.drops;
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;

  auto worker = [&] {
    for (;;) {
      const std::size_t t = next.fetch_add(1);
      if (t >= tasks) return;
      const auto& [geo, members] = groups[t / cfg.drops];
      const std::size_t drop = t % cfg.drops;
      const std::uint64_t seed = drop_seed(cfg.master_seed, drop);
      try {
        ScenarioParams sp = cfg.scenario;
        sp.num_aps = geo.num_aps;
        ChannelParams cp = cfg.channel;
        cp.ris_elements = geo.ris_elements;
        DropRealization d;
        try {
          d = realize_drop(sp, cp, seed);
        } catch (const InfeasibleError& e) {
          for (auto i : members) res.outcomes[i][drop] = infeasible_row(seed, e.what());
          continue;
        }
        for (auto i : members) res.outcomes[i][drop] = run_point(cfg, res.points[i], d);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next.store(tasks);
        return;
      }
    }
  };

  const std::size_t n_threads = std::max<std::size_t>(1, std::min(threads, tasks));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  for (std::size_t i = 0; i < res.points.size(); ++i)
    res.summaries.push_back(summarize(res.points[i], res.outcomes[i], cfg.channel.bandwidth_hz));
  return res;
}

void write_summary_csv(const SweepResult& r, std::ostream& out) {
  out << kPointHeader
      << ",drops_feasible,drops_infeasible,sum_se_mean,sum_se_stderr,ee_mean,ee_stderr,ee_ratio_of_means,p_total_mean\n";
  for (std::size_t i = 0; i < r.summaries.size(); ++i) {
    const auto& s = r.summaries[i];
    point_cells(out, i, s.point);
    out << ',' << s.feasible << ',' << s.infeasible << ',' << fmt(s.sum_se_mean) << ',' << fmt(s.sum_se_stderr) << ','
        << fmt(s.ee_mean) << ',' << fmt(s.ee_stderr) << ',' << fmt(s.ee_ratio_of_means) << ',' << fmt(s.p_total_mean)
        << '\n';
  }
}

void write_drops_csv(const SweepResult& r, std::ostream& out) {
  out << kPointHeader
      << ",drop,seed,feasible,sum_se,ee,p_total,p_static,p_pa,p_tx,outer_iterations,trace_violations\n";
  for (std::size_t i = 0; i < r.points.size(); ++i) {
    for (std::size_t d = 0; d < r.outcomes[i].size(); ++d) {
      const auto& o = r.outcomes[i][d];
      point_cells(out, i, r.points[i]);
      out << ',' << d << ',' << o.seed << ',' << (o.feasible ? 1 : 0) << ',' << fmt(o.sum_se) << ',' << fmt(o.ee)
          << ',' << fmt(o.p_total) << ',' << fmt(o.p_static) << ',' << fmt(o.p_pa) << ',' << fmt(o.p_tx) << ','
          << o.outer_iterations << ',' << o.trace_violations << '\n';
    }
  }
}

void write_result_json(const SweepResult& r, std::ostream& out) {
  using nlohmann::json;
  json j;
  j["provenance"] = {{"config_fingerprint", config_fingerprint(r.config)},
                     {"master_seed", r.config.master_seed},
                     {"drops", r.config.drops},
                     {"config", json::parse(config_to_json(r.config, -1))}};
  json pts = json::array();
  for (std::size_t i = 0; i < r.points.size(); ++i) {
    const auto& s = r.summaries[i];
    const auto& p = s.point;
    json jp = {{"point", i},
               {"p_t_dbm", p.p_t_dbm},
               {"mode", to_string(p.mode)},
               {"scheme", to_string(p.scheme)},
               {"ris_mode", to_string(p.ris_mode)},
               {"controller", controller_label(p.controller)},
               {"controller_power_w", p.controller.power_w},
               {"controller_index", p.controller_index},
               {"ris_elements", p.ris_elements},
               {"num_aps", p.num_aps},
               {"drops_feasible", s.feasible},
               {"drops_infeasible", s.infeasible},
               {"sum_se_mean", s.sum_se_mean},
               {"sum_se_stderr", s.sum_se_stderr},
               {"ee_mean", s.ee_mean},
               {"ee_stderr", s.ee_stderr},
               {"ee_ratio_of_means", s.ee_ratio_of_means},
               {"p_total_mean", s.p_total_mean}};
    json drops = json::array();
    for (std::size_t d = 0; d < r.outcomes[i].size(); ++d) {
      const auto& o = r.outcomes[i][d];
      json jd = {{"drop", d}, {"seed", o.seed}, {"feasible", o.feasible}};
      if (!o.feasible) {
        jd["error"] = o.error;
      } else {
        jd["sum_se"] = o.sum_se;
        jd["ee"] = o.ee;
        jd["ee_trace"] = o.ee_trace;
        jd["sinr"] = std::vector<double>(o.sinr.data(), o.sinr.data() + o.sinr.size());
        jd["se"] = std::vector<double>(o.se.data(), o.se.data() + o.se.size());
        jd["power"] = {{"p_pa", o.power.p_pa},   {"p_trxc", o.power.p_trxc}, {"p_fix", o.power.p_fix_total},
                       {"p_sp", o.power.p_sp},   {"p_ris", o.power.p_ris},   {"p_total", o.power.p_total}};
      }
      drops.push_back(std::move(jd));
    }
    jp["drops"] = std::move(drops);
    pts.push_back(std::move(jp));
  }
  j["points"] = std::move(pts);
  out << j.dump(1) << '\n';
}

void write_outputs(const SweepResult& r, const std::string& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream f(std::filesystem::path(dir) / name, std::ios::binary);
    if (!f) throw std::runtime_error(std::string("cannot write ") + name + " in " + dir);
    return f;
  };
  {
    auto f = open("summary.csv");
    write_summary_csv(r, f);
  }
  {
    auto f = open("drops.csv");
    write_drops_csv(r, f);
  }
  {
    auto f = open("result.json");
    write_result_json(r, f);
  }
}

std::size_t Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw std::invalid_argument("table: missing column '" + name + "'");
}

Table read_table(std::istream& in) {
  Table t;
  std::string line;
  if (!std::getline(in, line)) return t;
  t.header = split_csv_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != t.header.size()) throw std::invalid_argument("table: ragged row");
    t.rows.push_back(std::move(cells));
  }
  return t;
}

Table read_table_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("table: cannot open '" + path + "'");
  return read_table(in);
}

std::vector<std::string> emit_plot_data(const Table& t, const std::string& figure, const std::string& dir) {
  if (t.rows.empty()) throw std::invalid_argument("emit_plot_data: empty table");

  struct Layout {
    std::string x;                      // column or "controller_index"
    std::vector<std::string> fixed;     // always part of the curve label
    std::vector<std::string> optional;  // part of the label when they vary
    std::vector<std::pair<std::string, std::string>> metrics;  // (tag, column prefix)
  };
  const std::vector<std::string> all = {"scheme", "mode", "ris_mode", "controller", "controller_power_w",
                                        "ris_elements", "num_aps", "p_t_dbm"};
  auto minus = [&](std::vector<std::string> drop) {
    std::vector<std::string> out;
    for (const auto& c : all)
      if (std::find(drop.begin(), drop.end(), c) == drop.end()) out.push_back(c);
    return out;
  };
  Layout lay;
  if (figure == "fig2") {
    lay = {"p_t_dbm", {"scheme", "mode", "ris_mode"}, minus({"scheme", "mode", "ris_mode", "p_t_dbm"}),
           {{"ee", "ee"}, {"se", "sum_se"}}};
  } else if (figure == "fig3") {
    lay = {"sum_se_mean", {"ris_mode", "mode"}, minus({"ris_mode", "mode"}), {{"ee", "ee"}}};
  } else if (figure == "fig4") {
    lay = {"controller_index", {"mode"}, minus({"mode", "controller", "controller_power_w"}), {{"ee", "ee"}}};
  } else if (figure == "fig5") {
    lay = {"p_t_dbm", {"ris_elements", "mode"}, minus({"ris_elements", "mode", "p_t_dbm"}),
           {{"ee", "ee"}, {"se", "sum_se"}}};
  } else {
    throw std::invalid_argument("emit_plot_data: unknown figure '" + figure + "'");
  }

  const std::size_t xc = t.column(lay.x);
  std::vector<std::string> label_cols = lay.fixed;
  for (const auto& c : lay.optional) {
    const std::size_t ci = t.column(c);
    std::set<std::string> values;
    for (const auto& r : t.rows) values.insert(r[ci]);
    if (values.size() > 1) label_cols.push_back(c);
  }
  std::vector<std::size_t> label_idx;
  for (const auto& c : label_cols) label_idx.push_back(t.column(c));

  auto prefix = [](const std::string& col) -> std::string {
    if (col == "ris_elements") return "N";
    if (col == "num_aps") return "L";
    if (col == "p_t_dbm") return "PT";
    if (col == "controller_power_w") return "P";
    return "";
  };

  std::filesystem::create_directories(dir);
  std::vector<std::string> files;
  for (const auto& [tagname, metric] : lay.metrics) {
    const std::size_t yc = t.column(metric + "_mean");
    const std::size_t ec = t.column(metric + "_stderr");
    std::map<std::string, std::vector<std::array<double, 3>>> curves;
    std::vector<std::string> order;
    for (const auto& r : t.rows) {
      std::string label;
      for (std::size_t i = 0; i < label_idx.size(); ++i) {
        if (i) label += '_';
        label += prefix(label_cols[i]) + r[label_idx[i]];
      }
      double x = std::stod(r[xc]);
      if (lay.x == "controller_index") x += 1.0;
      if (!curves.count(label)) order.push_back(label);
      curves[label].push_back({x, std::stod(r[yc]), std::stod(r[ec])});
    }
    for (const auto& label : order) {
      auto pts = curves[label];
      if (lay.x != "sum_se_mean")
        std::stable_sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a[0] < b[0]; });
      const std::string name = figure + "_" + tagname + "_" + label + ".csv";
      std::ofstream f(std::filesystem::path(dir) / name, std::ios::binary);
      if (!f) throw std::runtime_error("cannot write " + name);
      f << "x,y,y_stderr\n";
      for (const auto& p : pts) f << fmt(p[0]) << ',' << fmt(p[1]) << ',' << fmt(p[2]) << '\n';
      files.push_back(name);
    }
  }
  return files;
}

}  // namespace risdmimo
