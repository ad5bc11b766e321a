// SPDX-License-Identifier: Apache-2.0
#include "risdmimo/config.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace risdmimo {
namespace {

using nlohmann::json;

// Reads known keys of one object and rejects the rest.
class Section {
 public:
  Section(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw std::invalid_argument("config: '" + where_ + "' must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception& e) {
      throw std::invalid_argument("config: " + where_ + "." + key + ": " + e.what());
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw std::invalid_argument("config: unknown key '" + where_ + "." + it.key() + "'");
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

template <typename T, typename F>
std::vector<T> string_list(const json& j, const std::string& where, F parse) {
  if (!j.is_array()) throw std::invalid_argument("config: '" + where + "' must be an array");
  std::vector<T> out;
  for (const auto& e : j) out.push_back(parse(e.get<std::string>()));
  return out;
}

std::string path_to_string(InterferencePath p) { return p == InterferencePath::Victim ? "victim" : "interferer"; }

InterferencePath path_from_string(const std::string& s) {
  if (s == "victim") return InterferencePath::Victim;
  if (s == "interferer") return InterferencePath::Interferer;
  throw std::invalid_argument("unknown interference path '" + s + "'");
}

void read_scenario(const json& j, ScenarioParams& s) {
  Section r(j, "scenario");
  r.get("width_m", s.area.width_m);
  r.get("depth_m", s.area.depth_m);
  r.get("ap_height_m", s.area.ap_height_m);
  r.get("ue_height_m", s.area.ue_height_m);
  r.get("ris_height_m", s.area.ris_height_m);
  r.get("num_aps", s.num_aps);
  r.get("num_ues", s.num_ues);
  r.get("num_ris", s.num_ris);
  r.get("active_fraction", s.active_fraction);
  r.get("slots_per_ap", s.slots_per_ap);
  r.finish();
}

void read_channel(const json& j, ChannelParams& c) {
  Section r(j, "channel");
  r.get("carrier_ghz", c.carrier_ghz);
  r.get("bandwidth_hz", c.bandwidth_hz);
  r.get("rician_k_db", c.rician_k_db);
  r.get("gain_tx_db", c.gain_tx_db);
  r.get("gain_rx_db", c.gain_rx_db);
  r.get("gain_ris_db", c.gain_ris_db);
  r.get("shadow_los_db", c.shadow_los_db);
  r.get("shadow_nlos_db", c.shadow_nlos_db);
  r.get("noise_psd_dbm_hz", c.noise_psd_dbm_hz);
  r.get("ap_antennas", c.ap_antennas);
  r.get("ris_elements", c.ris_elements);
  r.finish();
}

void read_power(const json& j, PowerModelParams& p) {
  Section r(j, "power");
  r.get("eta_pa", p.eta_pa);
  r.get("p_fix_w", p.p_fix_w);
  r.get("p_lo_w", p.p_lo_w);
  r.get("p_ap_ant_w", p.p_ap_ant_w);
  r.get("p_ue_ant_w", p.p_ue_ant_w);
  r.get("p_bias_w", p.p_bias_w);
  r.get("p_ris_ctrl_w", p.p_ris_ctrl_w);
  r.get("eta_ap_c_flops", p.eta_ap_c_flops);
  std::string mode = to_string(p.controller);
  r.get("controller", mode);
  p.controller = controller_from_string(mode);
  r.finish();
}

void read_optimizer(const json& j, ExperimentConfig& cfg) {
  SolverSettings& s = cfg.solver;
  Section r(j, "optimizer");
  r.get("inner_iters", s.inner_iters);
  r.get("outer_iters", s.outer_iters);
  r.get("epsilon", s.epsilon);
  r.get("inner_tol", s.inner_tol);
  r.get("max_solver_iters", s.max_solver_iters);
  r.get("stationarity_tol", s.stationarity_tol);
  r.get("objective_tol", s.objective_tol);
  r.get("floor_margin", s.floor_margin);
  r.get("ris_max_sweeps", s.ris_max_sweeps);
  r.get("ris_tol", s.ris_tol);
  r.get("ris_power_weighted", s.ris_power_weighted);
  r.get("ris_backtracks", s.ris_backtracks);
  r.get("link_restarts", s.link_restarts);
  std::string form = to_string(s.nu_form);
  r.get("nu_form", form);
  s.nu_form = nu_form_from_string(form);
  std::string path = path_to_string(cfg.interference_path);
  r.get("interference_path", path);
  cfg.interference_path = path_from_string(path);
  if (const json* f = r.child("sinr_min_db")) {
    if (f->is_null()) cfg.sinr_min_db.reset();
    else cfg.sinr_min_db = f->get<double>();
  }
  r.finish();
}

void read_sweep(const json& j, SweepAxes& a) {
  Section r(j, "sweep");
  r.get("p_t_dbm", a.p_t_dbm);
  if (const json* m = r.child("modes")) a.modes = string_list<Reception>(*m, "sweep.modes", reception_from_string);
  if (const json* m = r.child("schemes")) a.schemes = string_list<Scheme>(*m, "sweep.schemes", scheme_from_string);
  if (const json* m = r.child("ris_modes")) a.ris_modes = string_list<RisMode>(*m, "sweep.ris_modes", ris_mode_from_string);
  if (const json* m = r.child("controllers")) {
    if (!m->is_array()) throw std::invalid_argument("config: 'sweep.controllers' must be an array");
    a.controllers.clear();
    for (const auto& e : *m) {
      ControllerSpec c;
      Section cr(e, "sweep.controllers[]");
      std::string mode = to_string(c.mode);
      cr.get("mode", mode);
      c.mode = controller_from_string(mode);
      cr.get("power_w", c.power_w);
      cr.finish();
      a.controllers.push_back(c);
    }
  }
  r.get("ris_elements", a.ris_elements);
  r.get("num_aps", a.num_aps);
  r.finish();
}

json to_json(const ExperimentConfig& c) {
  json j;
  const auto& s = c.scenario;
  j["scenario"] = {{"width_m", s.area.width_m},         {"depth_m", s.area.depth_m},
                   {"ap_height_m", s.area.ap_height_m}, {"ue_height_m", s.area.ue_height_m},
                   {"ris_height_m", s.area.ris_height_m}, {"num_aps", s.num_aps},
                   {"num_ues", s.num_ues},              {"num_ris", s.num_ris},
                   {"active_fraction", s.active_fraction}, {"slots_per_ap", s.slots_per_ap}};
  const auto& ch = c.channel;
  j["channel"] = {{"carrier_ghz", ch.carrier_ghz},       {"bandwidth_hz", ch.bandwidth_hz},
                  {"rician_k_db", ch.rician_k_db},       {"gain_tx_db", ch.gain_tx_db},
                  {"gain_rx_db", ch.gain_rx_db},         {"gain_ris_db", ch.gain_ris_db},
                  {"shadow_los_db", ch.shadow_los_db},   {"shadow_nlos_db", ch.shadow_nlos_db},
                  {"noise_psd_dbm_hz", ch.noise_psd_dbm_hz}, {"ap_antennas", ch.ap_antennas},
                  {"ris_elements", ch.ris_elements}};
  const auto& p = c.power;
  j["power"] = {{"eta_pa", p.eta_pa},         {"p_fix_w", p.p_fix_w},
                {"p_lo_w", p.p_lo_w},         {"p_ap_ant_w", p.p_ap_ant_w},
                {"p_ue_ant_w", p.p_ue_ant_w}, {"p_bias_w", p.p_bias_w},
                {"p_ris_ctrl_w", p.p_ris_ctrl_w}, {"eta_ap_c_flops", p.eta_ap_c_flops},
                {"controller", to_string(p.controller)}};
  const auto& o = c.solver;
  j["optimizer"] = {{"inner_iters", o.inner_iters},
                    {"outer_iters", o.outer_iters},
                    {"epsilon", o.epsilon},
                    {"inner_tol", o.inner_tol},
                    {"max_solver_iters", o.max_solver_iters},
                    {"stationarity_tol", o.stationarity_tol},
                    {"objective_tol", o.objective_tol},
                    {"floor_margin", o.floor_margin},
                    {"ris_max_sweeps", o.ris_max_sweeps},
                    {"ris_tol", o.ris_tol},
                    {"ris_power_weighted", o.ris_power_weighted},
                    {"ris_backtracks", o.ris_backtracks},
                    {"link_restarts", o.link_restarts},
                    {"nu_form", to_string(o.nu_form)},
                    {"interference_path", path_to_string(c.interference_path)},
                    {"sinr_min_db", c.sinr_min_db ? json(*c.sinr_min_db) : json(nullptr)}};
  json sw;
  sw["p_t_dbm"] = c.sweep.p_t_dbm;
  for (auto m : c.sweep.modes) sw["modes"].push_back(to_string(m));
  for (auto m : c.sweep.schemes) sw["schemes"].push_back(to_string(m));
  for (auto m : c.sweep.ris_modes) sw["ris_modes"].push_back(to_string(m));
  for (const auto& ctl : c.sweep.controllers)
    sw["controllers"].push_back({{"mode", to_string(ctl.mode)}, {"power_w", ctl.power_w}});
  sw["ris_elements"] = c.ris_element_axis();
  sw["num_aps"] = c.num_ap_axis();
  j["sweep"] = sw;
  j["drops"] = c.drops;
  j["master_seed"] = c.master_seed;
  return j;
}

}  // namespace

std::string to_string(Scheme s) { return s == Scheme::Opa ? "OPA" : "EPA"; }

std::string to_string(RisMode m) {
  switch (m) {
    case RisMode::Opt: return "opt";
    case RisMode::Random: return "random";
    case RisMode::Absent: return "absent";
  }
  return "?";
}

Scheme scheme_from_string(const std::string& s) {
  if (s == "OPA" || s == "opa") return Scheme::Opa;
  if (s == "EPA" || s == "epa") return Scheme::Epa;
  throw std::invalid_argument("unknown power scheme '" + s + "'");
}

RisMode ris_mode_from_string(const std::string& s) {
  if (s == "opt") return RisMode::Opt;
  if (s == "random" || s == "rand") return RisMode::Random;
  if (s == "absent" || s == "none") return RisMode::Absent;
  throw std::invalid_argument("unknown RIS mode '" + s + "'");
}

std::vector<std::size_t> ExperimentConfig::ris_element_axis() const {
  return sweep.ris_elements.empty() ? std::vector<std::size_t>{channel.ris_elements} : sweep.ris_elements;
}

std::vector<std::size_t> ExperimentConfig::num_ap_axis() const {
  return sweep.num_aps.empty() ? std::vector<std::size_t>{scenario.num_aps} : sweep.num_aps;
}

void ExperimentConfig::validate() const {
  scenario.area.validate();
  power.validate();
  solver.validate();
  if (scenario.num_ues == 0) throw std::invalid_argument("config: num_ues must be positive");
  if (!(scenario.active_fraction > 0.0 && scenario.active_fraction <= 1.0))
    throw std::invalid_argument("config: active_fraction must lie in (0, 1]");
  if (scenario.slots_per_ap == 0) throw std::invalid_argument("config: slots_per_ap must be positive");
  if (channel.ap_antennas == 0) throw std::invalid_argument("config: ap_antennas must be positive");
  if (!(channel.bandwidth_hz > 0.0 && channel.carrier_ghz > 0.0))
    throw std::invalid_argument("config: bandwidth and carrier must be positive");
  if (drops == 0) throw std::invalid_argument("config: drops must be positive");
  if (sweep.p_t_dbm.empty() || sweep.modes.empty() || sweep.schemes.empty() || sweep.ris_modes.empty() ||
      sweep.controllers.empty()) {
    throw std::invalid_argument("config: every sweep axis must be nonempty");
  }
  for (double p : sweep.p_t_dbm)
    if (!std::isfinite(p)) throw std::invalid_argument("config: P_T values must be finite");
  for (const auto& c : sweep.controllers)
    if (!(c.power_w > 0.0)) throw std::invalid_argument("config: controller power must be positive");
  for (auto n : ris_element_axis())
    if (n == 0) throw std::invalid_argument("config: ris_elements must be positive");
  for (auto l : num_ap_axis())
    if (l < 2) throw std::invalid_argument("config: at least two APs are required");
  if (sinr_min_db && !std::isfinite(*sinr_min_db)) throw std::invalid_argument("config: sinr_min_db must be finite");
}

ExperimentConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  ExperimentConfig cfg;
  Section r(j, "");
  if (const json* s = r.child("scenario")) read_scenario(*s, cfg.scenario);
  if (const json* s = r.child("channel")) read_channel(*s, cfg.channel);
  if (const json* s = r.child("power")) read_power(*s, cfg.power);
  if (const json* s = r.child("optimizer")) read_optimizer(*s, cfg);
  if (const json* s = r.child("sweep")) read_sweep(*s, cfg.sweep);
  r.get("drops", cfg.drops);
  r.get("master_seed", cfg.master_seed);
  r.finish();
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

std::string config_to_json(const ExperimentConfig& cfg, int indent) { return to_json(cfg).dump(indent); }

std::string config_fingerprint(const ExperimentConfig& cfg) {
  const std::string s = to_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace risdmimo
