// SPDX-License-Identifier: Apache-2.0
#include "risdmimo/power.hpp"

#include <stdexcept>

namespace risdmimo {

std::string to_string(ControllerMode mode) { return mode == ControllerMode::Centralized ? "centralized" : "per_ris"; }

ControllerMode controller_from_string(const std::string& s) {
  if (s == "centralized" || s == "central") return ControllerMode::Centralized;
  if (s == "per_ris" || s == "per-ris") return ControllerMode::PerRis;
  throw std::invalid_argument("unknown controller mode '" + s + "'");
}

void PowerModelParams::validate() const {
  if (!(eta_pa > 0.0 && eta_pa <= 1.0)) throw std::invalid_argument("PowerModelParams: eta_pa must lie in (0, 1]");
  if (!(p_fix_w > 0.0 && p_lo_w > 0.0 && p_ap_ant_w > 0.0 && p_ue_ant_w > 0.0 && p_bias_w > 0.0 &&
        p_ris_ctrl_w > 0.0 && eta_ap_c_flops > 0.0)) {
    throw std::invalid_argument("PowerModelParams: all power terms must be positive");
  }
}

double pa_power(double total_tx_w, double eta_pa) { return total_tx_w / eta_pa; }

double signal_processing_power(const NetworkSize& n, const PowerModelParams& p) {
  return n.bandwidth_hz * 3.0 * static_cast<double>(n.num_aps * n.ap_antennas * n.active_ues) / p.eta_ap_c_flops;
}

PowerBreakdown static_power(const NetworkSize& n, const PowerModelParams& p) {
  p.validate();
  const auto L = static_cast<double>(n.num_aps);
  PowerBreakdown b;
  b.p_trxc = L * p.p_lo_w + L * static_cast<double>(n.ap_antennas) * p.p_ap_ant_w +
             static_cast<double>(n.active_ues) * p.p_ue_ant_w;
  b.p_fix_total = L * p.p_fix_w;
  b.p_sp = signal_processing_power(n, p);
  if (n.num_ris > 0) {
    const auto M = static_cast<double>(n.num_ris);
    const double ctrl = p.controller == ControllerMode::PerRis ? M * p.p_ris_ctrl_w : p.p_ris_ctrl_w;
    b.p_ris = M * static_cast<double>(n.ris_elements) * p.p_bias_w + ctrl;
  }
  b.p_total = b.p_static();
  return b;
}

PowerBreakdown with_transmit_power(PowerBreakdown stat, double total_tx_w, double eta_pa) {
  stat.p_pa = pa_power(total_tx_w, eta_pa);
  stat.p_total = stat.p_pa + stat.p_static();
  return stat;
}

double global_ee(double sum_se, double bandwidth_hz, double p_total_w) {
  if (!(p_total_w > 0.0)) throw std::invalid_argument("global_ee: total power must be positive");
  return bandwidth_hz * sum_se / p_total_w;
}

}  // namespace risdmimo
