// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "risdmimo/rng.hpp"
#include "risdmimo/scenario.hpp"
#include "risdmimo/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace risdmimo {

/// Channel model parameters. Defaults follow the indoor setup (4 GHz, 20 MHz,
/// kappa 5 dB, shadowing 3 / 8.03 dB).
struct ChannelParams {
  double carrier_ghz = 4.0;
  double bandwidth_hz = 20e6;
  double rician_k_db = 5.0;
  double gain_tx_db = 5.0;
  double gain_rx_db = 2.0;
  double gain_ris_db = 4.0;  // applied on each side of the surface
  double shadow_los_db = 3.0;
  double shadow_nlos_db = 8.03;
  double noise_psd_dbm_hz = -174.0;
  std::size_t ap_antennas = 4;
  std::size_t ris_elements = 256;

  double noise_power_w() const;
};

struct LinkLargeScale {
  double beta = 0.0;   // linear power gain including antenna gains
  double kappa = 0.0;  // linear Rician factor
  bool is_los = false;
  double pathloss_db = 0.0;  // includes shadowing
  double shadowing_db = 0.0;
};

// InH-Office pathloss. Distances below 1 m are clamped to 1 m.
double pathloss_db(double d3d_m, double fc_ghz, bool los);

// InH-Office LoS probability as a function of horizontal distance.
double los_probability(double d2d_m);

/// Unit-norm half-wavelength ULA response, element i = exp(j*pi*i*sin(theta))/sqrt(N).
template <typename Scalar = double>
CVector<Scalar> steering_vector(Scalar theta, std::size_t n) {
  if (n == 0) throw std::invalid_argument("steering_vector: N must be at least 1");
  CVector<Scalar> a(static_cast<Eigen::Index>(n));
  const Scalar s = std::sin(theta);
  const Scalar norm = Scalar(1) / std::sqrt(static_cast<Scalar>(n));
  for (std::size_t i = 0; i < n; ++i) {
    a(static_cast<Eigen::Index>(i)) =
        std::polar(norm, static_cast<Scalar>(std::numbers::pi_v<Scalar> * static_cast<Scalar>(i) * s));
  }
  return a;
}

/// Horizontal-plane azimuth of the direction from `from` to `to`.
double azimuth(const Point3& from, const Point3& to);

/// Draws LoS state and shadowing for one link and assembles its large-scale gain.
LinkLargeScale draw_link(const Point3& tx, const Point3& rx, double antenna_gain_db,
                         const ChannelParams& params, Rng& rng);

/// sqrt(beta) * ( sqrt(k/(k+1)) * sqrt(Nr*Nt) * a_r a_t^H + sqrt(1/(k+1)) * W ).
/// The LoS part carries unit-modulus entries so that E|H_ij|^2 = beta.
MatrixXcd rician_channel(const LinkLargeScale& ls, double theta_r, double theta_t, std::size_t nr,
                         std::size_t nt, Rng& rng);
MatrixXcd rician_channel(const LinkLargeScale& ls, double theta_r, double theta_t, std::size_t nr,
                         std::size_t nt, std::uint64_t seed);

/// Large-scale state of every link of one drop, over the active UEs.
struct LargeScaleSet {
  std::size_t num_aps = 0, num_ris = 0, num_ues = 0;
  std::vector<LinkLargeScale> ap_ue;   // n * K + k
  std::vector<LinkLargeScale> ap_ris;  // n * M + m
  std::vector<LinkLargeScale> ris_ue;  // m * K + k

  const LinkLargeScale& direct(std::size_t n, std::size_t k) const { return ap_ue[n * num_ues + k]; }
  const LinkLargeScale& to_ris(std::size_t n, std::size_t m) const { return ap_ris[n * num_ris + m]; }
  const LinkLargeScale& from_ris(std::size_t m, std::size_t k) const { return ris_ue[m * num_ues + k]; }

  /// UE x AP matrix of direct-link betas.
  Eigen::MatrixXd direct_gains() const;
  /// UE x RIS association metric beta(n1(k) -> m) * beta(m -> k).
  Eigen::MatrixXd cascade_gains(const std::vector<ApPair>& clusters) const;
};

LargeScaleSet draw_large_scale(const ScenarioInstance& scenario, const ChannelParams& params,
                               std::uint64_t seed);

/// All small-scale channels of one drop. Immutable after construction.
struct ChannelSet {
  std::size_t num_aps = 0, num_ris = 0, num_ues = 0;
  std::size_t ap_antennas = 0, ris_elements = 0;
  std::vector<MatrixXcd> ap_ris;     // n * M + m, N_RIS x N_AP
  std::vector<VectorXcd> ris_ue;     // m * K + k, N_RIS
  std::vector<RowVectorXcd> ap_ue;   // n * K + k, 1 x N_AP
  LargeScaleSet large_scale;

  const MatrixXcd& H(std::size_t n, std::size_t m) const { return ap_ris[n * num_ris + m]; }
  const VectorXcd& g(std::size_t m, std::size_t k) const { return ris_ue[m * num_ues + k]; }
  const RowVectorXcd& r(std::size_t n, std::size_t k) const { return ap_ue[n * num_ues + k]; }
};

ChannelSet draw_channels(const ScenarioInstance& scenario, const LargeScaleSet& large,
                         const ChannelParams& params, std::uint64_t seed);

/// Per-RIS unit-modulus phase vectors.
struct RisConfig {
  std::vector<Eigen::VectorXd> phases;

  static RisConfig zeros(std::size_t num_ris, std::size_t elements);
  static RisConfig random(std::size_t num_ris, std::size_t elements, std::uint64_t seed);

  std::size_t size() const { return phases.size(); }
  /// Diagonal of Phi_m.
  VectorXcd reflection(std::size_t m) const;
};

/// Per (AP, UE) oscillator phase offsets; zero in coherent mode.
struct PhaseOffsets {
  Eigen::MatrixXd delta;  // L x K

  static PhaseOffsets zeros(std::size_t num_aps, std::size_t num_ues);
  static PhaseOffsets random(std::size_t num_aps, std::size_t num_ues, std::uint64_t seed);
};

/// g^H * diag(reflection) * H for a single RIS.
template <typename Scalar, typename DerivedG, typename DerivedPhi, typename DerivedH>
CRowVector<Scalar> reflected_row(const Eigen::MatrixBase<DerivedG>& g, const Eigen::MatrixBase<DerivedPhi>& phi,
                                 const Eigen::MatrixBase<DerivedH>& H) {
  return (g.conjugate().cwiseProduct(phi)).transpose() * H;
}

/// h_{n,k} = g_{m,k}^H Phi_m H_{n,m} + r_{n,k}, times exp(j*Delta_{n,k}) in
/// non-coherent mode. `ris` = kNoRis gives the direct path only.
RowVectorXcd effective_channel(const ChannelSet& channels, std::size_t n, std::size_t k, std::size_t ris,
                               const RisConfig& config, const PhaseOffsets& offsets, Reception mode);

/// Writes the channel set as NumPy .npy arrays into `dir` (created if absent).
void export_channels(const ChannelSet& channels, const std::string& dir);

}  // namespace risdmimo
