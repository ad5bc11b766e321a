// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>

namespace risdmimo {

enum class ControllerMode { Centralized, PerRis };

std::string to_string(ControllerMode mode);
ControllerMode controller_from_string(const std::string& s);

struct PowerModelParams {
  double eta_pa = 0.4;
  double p_fix_w = 0.875;       // per AP
  double p_lo_w = 0.1;          // per AP
  double p_ap_ant_w = 0.2;      // per AP antenna
  double p_ue_ant_w = 0.1;      // per UE antenna
  double p_bias_w = 0.997e-3;   // per RIS element
  double p_ris_ctrl_w = 4.8;    // per controller
  double eta_ap_c_flops = 750e9;
  ControllerMode controller = ControllerMode::Centralized;

  void validate() const;
};

struct PowerBreakdown {
  double p_pa = 0.0;
  double p_trxc = 0.0;
  double p_fix_total = 0.0;
  double p_sp = 0.0;
  double p_ris = 0.0;
  double p_total = 0.0;

  double p_static() const { return p_trxc + p_fix_total + p_sp + p_ris; }
};

struct NetworkSize {
  std::size_t num_aps = 9;
  std::size_t ap_antennas = 4;
  std::size_t active_ues = 10;
  std::size_t num_ris = 10;
  std::size_t ris_elements = 256;
  double bandwidth_hz = 20e6;
};

/// Total allocated transmit power over the PA efficiency.
double pa_power(double total_tx_w, double eta_pa);

/// Signal-processing power B * 3 * L * N_AP * K_act / eta_AP-c: one complex
/// MAC (~3 flops) per sample per antenna per served stream.
double signal_processing_power(const NetworkSize& size, const PowerModelParams& params);

/// Every static term; `p_pa` is left at zero and `p_total` equals P_static.
PowerBreakdown static_power(const NetworkSize& size, const PowerModelParams& params);

/// Adds the PA term to a static breakdown.
PowerBreakdown with_transmit_power(PowerBreakdown stat, double total_tx_w, double eta_pa);

/// B * sum_se / p_total, bps/J.
double global_ee(double sum_se, double bandwidth_hz, double p_total_w);

}  // namespace risdmimo
