// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "risdmimo/types.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace risdmimo {

struct AreaSpec {
  double width_m = 300.0;
  double depth_m = 150.0;
  double ap_height_m = 3.0;
  double ue_height_m = 1.0;
  double ris_height_m = 2.0;

  void validate() const;
  bool contains(const Point3& p) const;
};

struct GridShape {
  std::size_t nx = 1;
  std::size_t ny = 1;
};

struct ScenarioParams {
  AreaSpec area;
  std::size_t num_aps = 9;
  std::size_t num_ues = 100;
  std::size_t num_ris = 10;
  double active_fraction = 0.1;
  std::size_t slots_per_ap = 4;
};

using ApPair = std::array<std::size_t, 2>;

/// One Monte Carlo drop: geometry plus all associations.
/// UE-indexed fields (`clusters`, `ris_assoc`) run over the active set, in the
/// order of `active_ues`.
struct ScenarioInstance {
  Points3 ap_positions;
  Points3 ue_positions;   // all K UEs
  Points3 ris_positions;  // empty when RIS are absent
  std::vector<std::size_t> active_ues;
  std::vector<ApPair> clusters;
  std::vector<std::size_t> ris_assoc;
  std::uint64_t rng_seed = 0;

  std::size_t num_aps() const { return ap_positions.size(); }
  std::size_t num_ris() const { return ris_positions.size(); }
  std::size_t num_active() const { return active_ues.size(); }
  const Point3& active_position(std::size_t k) const { return ue_positions[active_ues[k]]; }
};

/// Factor pair of L whose aspect nx/ny is closest to width/depth.
GridShape grid_shape(const AreaSpec& area, std::size_t num_aps);

Points3 place_aps(const AreaSpec& area, std::size_t num_aps);
Points3 place_ues(const AreaSpec& area, std::size_t num_ues, std::uint64_t seed);
Points3 place_ris(const AreaSpec& area, std::size_t num_ris, std::uint64_t seed);

/// ceil(fraction*K) distinct indices, sorted ascending.
std::vector<std::size_t> select_active(std::size_t num_ues, double fraction, std::uint64_t seed);

/// Two strongest APs per UE under a per-AP capacity of `slots_per_ap`.
/// `gains` is UE x AP. UEs are served greedily in descending order of their
/// best gain; a saturated AP is skipped in favour of the next strongest one.
std::vector<ApPair> cluster_aps(const Eigen::MatrixXd& gains, std::size_t slots_per_ap);

/// argmax per row of a UE x RIS metric; ties go to the lowest index.
std::vector<std::size_t> associate_ris(const Eigen::MatrixXd& cascade_gains);

/// Geometry and active set only; clusters and RIS association are filled once
/// large-scale gains exist (see `realize_drop`).
ScenarioInstance draw_layout(const ScenarioParams& params, std::uint64_t seed);

/// Per-AP number of served UEs.
std::vector<std::size_t> ap_loads(const std::vector<ApPair>& clusters, std::size_t num_aps);

}  // namespace risdmimo
