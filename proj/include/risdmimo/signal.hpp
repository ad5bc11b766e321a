// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "risdmimo/channel.hpp"
#include "risdmimo/scenario.hpp"
#include "risdmimo/types.hpp"

#include <array>
#include <vector>

namespace risdmimo {

/// Maximum-ratio precoder q = h^H / ||h||.
template <typename Derived>
CVector<typename Derived::RealScalar> mrt_precoder(const Eigen::MatrixBase<Derived>& h_eff) {
  const auto norm = h_eff.norm();
  if (!(norm > 0)) throw std::invalid_argument("mrt_precoder: zero effective channel");
  return h_eff.adjoint() / norm;
}

/// q[k][t] is the unit-norm precoder of AP n_t(k) towards UE k.
struct PrecoderSet {
  std::vector<std::array<VectorXcd, 2>> q;
};

/// Which RIS carries the reflected part of an interfering link j -> k.
enum class InterferencePath {
  Victim,      // the interfered UE's own RIS m_k
  Interferer,  // the interfering UE's RIS m_j
};

/// MRT towards the offset-free effective channels under the current RIS phases.
PrecoderSet mrt_precoders(const ScenarioInstance& scenario, const ChannelSet& channels, const RisConfig& ris);

/// Per-UE desired scalars C_{t,k} and per ordered pair interference scalars
/// D_{t j,k}; the reals of the compact SINR form are derived from these.
struct EffectiveConstants {
  Eigen::MatrixX2cd desired;    // (k, t)
  MatrixXcd interference[2];    // interference[t](j, k)
  double noise_var = 0.0;

  std::size_t num_ues() const { return static_cast<std::size_t>(desired.rows()); }

  double cdes1(std::size_t k) const { return std::norm(desired(idx(k), 0)); }
  double cdes2(std::size_t k) const { return std::norm(desired(idx(k), 1)); }
  double cdes3(std::size_t k) const { return 2.0 * std::real(desired(idx(k), 0) * std::conj(desired(idx(k), 1))); }
  double cint1(std::size_t j, std::size_t k) const { return std::norm(interference[0](idx(j), idx(k))); }
  double cint2(std::size_t j, std::size_t k) const { return std::norm(interference[1](idx(j), idx(k))); }
  double cint3(std::size_t j, std::size_t k) const {
    return 2.0 * std::real(interference[0](idx(j), idx(k)) * std::conj(interference[1](idx(j), idx(k))));
  }

 private:
  static Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }
};

/// C_{t,k} for one UE.
cd effective_scalar(std::size_t k, std::size_t t, const ScenarioInstance& scenario, const ChannelSet& channels,
                    const RisConfig& ris, const PhaseOffsets& offsets, const PrecoderSet& precoders, Reception mode);

EffectiveConstants build_constants(const ScenarioInstance& scenario, const ChannelSet& channels, const RisConfig& ris,
                                   const PhaseOffsets& offsets, const PrecoderSet& precoders, Reception mode,
                                   double noise_var, InterferencePath path = InterferencePath::Victim);

/// p(k, t) is the power of AP n_t(k) towards UE k, in Watts.
struct PowerAllocation {
  Eigen::MatrixX2d p;

  std::size_t num_ues() const { return static_cast<std::size_t>(p.rows()); }
  double total() const { return p.sum(); }
  /// Sum of allocated power per AP.
  Eigen::VectorXd per_ap(const std::vector<ApPair>& clusters, std::size_t num_aps) const;
  /// L x K matrix form p_{n,k}.
  Eigen::MatrixXd as_ap_ue(const std::vector<ApPair>& clusters, std::size_t num_aps) const;
};

/// Each AP splits its budget equally over the UEs it serves.
PowerAllocation equal_power(const std::vector<ApPair>& clusters, const Eigen::VectorXd& p_max);

/// A_k of the compact form: p1*Cdes1 + p2*Cdes2 + sqrt(p1*p2)*Cdes3.
double desired_power(double p1, double p2, std::size_t k, const EffectiveConstants& constants);
/// B_k: interference from every other UE's serving pair plus noise.
double interference_power(std::size_t k, const PowerAllocation& alloc, const EffectiveConstants& constants);
double sinr(std::size_t k, const PowerAllocation& alloc, const EffectiveConstants& constants);
Eigen::VectorXd sinr_all(const PowerAllocation& alloc, const EffectiveConstants& constants);
/// Sum over UEs of log2(1 + SINR), bps/Hz.
double sum_se(const PowerAllocation& alloc, const EffectiveConstants& constants);

}  // namespace risdmimo
