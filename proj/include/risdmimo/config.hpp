// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "risdmimo/channel.hpp"
#include "risdmimo/optimizer.hpp"
#include "risdmimo/power.hpp"
#include "risdmimo/scenario.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace risdmimo {

enum class Scheme { Opa, Epa };
enum class RisMode { Opt, Random, Absent };

std::string to_string(Scheme s);
std::string to_string(RisMode m);
Scheme scheme_from_string(const std::string& s);
RisMode ris_mode_from_string(const std::string& s);

struct ControllerSpec {
  ControllerMode mode = ControllerMode::Centralized;
  double power_w = 4.8;

  bool operator==(const ControllerSpec&) const = default;
};

struct SweepAxes {
  std::vector<double> p_t_dbm{30.0};
  std::vector<Reception> modes{Reception::Coherent};
  std::vector<Scheme> schemes{Scheme::Opa};
  std::vector<RisMode> ris_modes{RisMode::Opt};
  std::vector<ControllerSpec> controllers{ControllerSpec{}};
  std::vector<std::size_t> ris_elements;  // empty: channel.ris_elements
  std::vector<std::size_t> num_aps;       // empty: scenario.num_aps
};

struct ExperimentConfig {
  ScenarioParams scenario;
  ChannelParams channel;
  PowerModelParams power;
  SolverSettings solver;
  std::optional<double> sinr_min_db;  // one floor for every active UE
  InterferencePath interference_path = InterferencePath::Victim;
  SweepAxes sweep;
  std::size_t drops = 200;
  std::uint64_t master_seed = 1;

  /// Throws std::invalid_argument on the first inconsistent field.
  void validate() const;

  std::vector<std::size_t> ris_element_axis() const;
  std::vector<std::size_t> num_ap_axis() const;
};

/// Parses a JSON document. Missing keys keep their defaults; unknown keys
/// are rejected.
ExperimentConfig config_from_json(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Canonical JSON dump (sorted keys, every field present).
std::string config_to_json(const ExperimentConfig& cfg, int indent = 2);

/// FNV-1a 64 of the compact canonical dump, as 16 hex digits.
std::string config_fingerprint(const ExperimentConfig& cfg);

}  // namespace risdmimo
