// SPDX-License-Identifier: Apache-2.0
#include "risdmimo/signal.hpp"

#include <cmath>

namespace risdmimo {
namespace {

Eigen::Index ix(std::size_t i) { return static_cast<Eigen::Index>(i); }

void check_shapes(const ScenarioInstance& s, const ChannelSet& c) {
  if (s.clusters.size() != c.num_ues || s.num_aps() != c.num_aps) {
    throw std::invalid_argument("signal: scenario and channel set disagree on dimensions");
  }
  if (c.num_ris > 0 && s.ris_assoc.size() != c.num_ues) {
    throw std::invalid_argument("signal: RIS association missing for some UE");
  }
}

std::size_t ris_of(const ScenarioInstance& s, const ChannelSet& c, std::size_t k) {
  return c.num_ris == 0 ? kNoRis : s.ris_assoc[k];
}

cd offset_phase(const PhaseOffsets& offsets, std::size_t n, std::size_t k, Reception mode) {
  if (mode == Reception::Coherent) return {1.0, 0.0};
  return std::polar(1.0, offsets.delta(ix(n), ix(k)));
}

}  // namespace

PrecoderSet mrt_precoders(const ScenarioInstance& s, const ChannelSet& c, const RisConfig& ris) {
  check_shapes(s, c);
  const PhaseOffsets none = PhaseOffsets::zeros(c.num_aps, c.num_ues);
  PrecoderSet out;
  out.q.resize(c.num_ues);
  for (std::size_t k = 0; k < c.num_ues; ++k) {
    for (std::size_t t = 0; t < 2; ++t) {
      const RowVectorXcd h = effective_channel(c, s.clusters[k][t], k, ris_of(s, c, k), ris, none, Reception::Coherent);
      out.q[k][t] = mrt_precoder(h);
    }
  }
  return out;
}

cd effective_scalar(std::size_t k, std::size_t t, const ScenarioInstance& s, const ChannelSet& c, const RisConfig& ris,
                    const PhaseOffsets& offsets, const PrecoderSet& precoders, Reception mode) {
  check_shapes(s, c);
  if (t > 1) throw std::out_of_range("effective_scalar: t indexes a two-AP cluster");
  const std::size_t n = s.clusters.at(k)[t];
  const RowVectorXcd h = effective_channel(c, n, k, ris_of(s, c, k), ris, offsets, mode);
  return (h * precoders.q.at(k)[t])(0);
}

EffectiveConstants build_constants(const ScenarioInstance& s, const ChannelSet& c, const RisConfig& ris,
                                   const PhaseOffsets& offsets, const PrecoderSet& precoders, Reception mode,
                                   double noise_var, InterferencePath path) {
  check_shapes(s, c);
  const std::size_t K = c.num_ues;
  const std::size_t L = c.num_aps;
  if (precoders.q.size() != K) throw std::invalid_argument("build_constants: one precoder pair per UE required");

  // Offset-free effective rows h_{n,k} through the victim's RIS.
  const PhaseOffsets none = PhaseOffsets::zeros(L, K);
  std::vector<RowVectorXcd> rows(L * K);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t n = 0; n < L; ++n)
      rows[n * K + k] = effective_channel(c, n, k, ris_of(s, c, k), ris, none, Reception::Coherent);

  auto scalar = [&](std::size_t n, std::size_t k, const VectorXcd& q, std::size_t via) -> cd {
    cd v;
    if (via == ris_of(s, c, k)) v = (rows[n * K + k] * q)(0);
    else v = (effective_channel(c, n, k, via, ris, none, Reception::Coherent) * q)(0);
    return v * offset_phase(offsets, n, k, mode);
  };

  EffectiveConstants out;
  out.noise_var = noise_var;
  out.desired.resize(ix(K), 2);
  out.interference[0] = MatrixXcd::Zero(ix(K), ix(K));
  out.interference[1] = MatrixXcd::Zero(ix(K), ix(K));
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t t = 0; t < 2; ++t) out.desired(ix(k), ix(t)) = scalar(s.clusters[k][t], k, precoders.q[k][t], ris_of(s, c, k));
  }
  for (std::size_t j = 0; j < K; ++j) {
    const std::size_t via_j = ris_of(s, c, j);
    for (std::size_t k = 0; k < K; ++k) {
      if (j == k) continue;
      const std::size_t via = path == InterferencePath::Victim ? ris_of(s, c, k) : via_j;
      for (std::size_t t = 0; t < 2; ++t)
        out.interference[t](ix(j), ix(k)) = scalar(s.clusters[j][t], k, precoders.q[j][t], via);
    }
  }
  return out;
}

Eigen::VectorXd PowerAllocation::per_ap(const std::vector<ApPair>& clusters, std::size_t num_aps) const {
  Eigen::VectorXd load = Eigen::VectorXd::Zero(ix(num_aps));
  for (std::size_t k = 0; k < clusters.size(); ++k)
    for (std::size_t t = 0; t < 2; ++t) load(ix(clusters[k][t])) += p(ix(k), ix(t));
  return load;
}

Eigen::MatrixXd PowerAllocation::as_ap_ue(const std::vector<ApPair>& clusters, std::size_t num_aps) const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(ix(num_aps), ix(clusters.size()));
  for (std::size_t k = 0; k < clusters.size(); ++k)
    for (std::size_t t = 0; t < 2; ++t) out(ix(clusters[k][t]), ix(k)) = p(ix(k), ix(t));
  return out;
}

PowerAllocation equal_power(const std::vector<ApPair>& clusters, const Eigen::VectorXd& p_max) {
  std::vector<std::size_t> load = ap_loads(clusters, static_cast<std::size_t>(p_max.size()));
  PowerAllocation a;
  a.p.resize(ix(clusters.size()), 2);
  for (std::size_t k = 0; k < clusters.size(); ++k)
    for (std::size_t t = 0; t < 2; ++t) {
      const std::size_t n = clusters[k][t];
      a.p(ix(k), ix(t)) = p_max(ix(n)) / static_cast<double>(load[n]);
    }
  return a;
}

double desired_power(double p1, double p2, std::size_t k, const EffectiveConstants& c) {
  return p1 * c.cdes1(k) + p2 * c.cdes2(k) + std::sqrt(p1 * p2) * c.cdes3(k);
}

double interference_power(std::size_t k, const PowerAllocation& alloc, const EffectiveConstants& c) {
  double b = c.noise_var;
  for (std::size_t j = 0; j < c.num_ues(); ++j) {
    if (j == k) continue;
    const double p1 = alloc.p(ix(j), 0);
    const double p2 = alloc.p(ix(j), 1);
    b += p1 * c.cint1(j, k) + p2 * c.cint2(j, k) + std::sqrt(p1 * p2) * c.cint3(j, k);
  }
  return b;
}

double sinr(std::size_t k, const PowerAllocation& alloc, const EffectiveConstants& c) {
  const double a = desired_power(alloc.p(ix(k), 0), alloc.p(ix(k), 1), k, c);
  // The compact form can round slightly below zero under destructive combining.
  return std::max(a, 0.0) / interference_power(k, alloc, c);
}

Eigen::VectorXd sinr_all(const PowerAllocation& alloc, const EffectiveConstants& c) {
  Eigen::VectorXd g(ix(c.num_ues()));
  for (std::size_t k = 0; k < c.num_ues(); ++k) g(ix(k)) = sinr(k, alloc, c);
  return g;
}

double sum_se(const PowerAllocation& alloc, const EffectiveConstants& c) {
  double se = 0.0;
  for (std::size_t k = 0; k < c.num_ues(); ++k) se += std::log2(1.0 + sinr(k, alloc, c));
  return se;
}

}  // namespace risdmimo
