// SPDX-License-Identifier: Apache-2.0
// Reference computations for tests. Everything here is written out with
// explicit loops over raw channel entries and never calls the library's
// compact-form or optimizer code.
#pragma once

#include "risdmimo/channel.hpp"
#include "risdmimo/scenario.hpp"
#include "risdmimo/signal.hpp"

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

namespace oracle {

using cd = std::complex<double>;
using risdmimo::ChannelSet;
using risdmimo::PhaseOffsets;
using risdmimo::PowerAllocation;
using risdmimo::PrecoderSet;
using risdmimo::Reception;
using risdmimo::RisConfig;
using risdmimo::ScenarioInstance;

/// Received amplitude at UE k of a unit-power stream sent by AP n with
/// precoder q, reflected through RIS m (m < 0: direct path only).
inline cd path_amplitude(const ChannelSet& c, std::size_t n, std::size_t k, long m, const RisConfig& ris,
                         const Eigen::VectorXcd& q) {
  cd acc = 0.0;
  for (std::size_t a = 0; a < c.ap_antennas; ++a) {
    cd h = c.r(n, k)(static_cast<Eigen::Index>(a));
    if (m >= 0) {
      const auto mm = static_cast<std::size_t>(m);
      for (std::size_t i = 0; i < c.ris_elements; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        h += std::conj(c.g(mm, k)(ii)) * std::polar(1.0, ris.phases[mm](ii)) * c.H(n, mm)(ii, static_cast<Eigen::Index>(a));
      }
    }
    acc += h * q(static_cast<Eigen::Index>(a));
  }
  return acc;
}

/// SINR of UE k straight from the received signal y_k = sum_j sum_{n in S_j}
/// sqrt(p_{n,j}) e^{j Delta_{n,k}} h_{n,k} q_{n,j} s_j + w_k, with every
/// stream reaching UE k through UE k's own RIS.
inline double raw_sinr(std::size_t k, const ScenarioInstance& s, const ChannelSet& c, const RisConfig& ris,
                       const PhaseOffsets& off, const PrecoderSet& q, const PowerAllocation& p, Reception mode,
                       double noise) {
  const long m = c.num_ris == 0 ? -1 : static_cast<long>(s.ris_assoc[k]);
  auto stream = [&](std::size_t j) {
    cd y = 0.0;
    for (std::size_t t = 0; t < 2; ++t) {
      const std::size_t n = s.clusters[j][t];
      const double delta = mode == Reception::Coherent ? 0.0 : off.delta(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
      y += std::sqrt(p.p(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(t))) * std::polar(1.0, delta) *
           path_amplitude(c, n, k, m, ris, q.q[j][t]);
    }
    return std::norm(y);
  };
  double interference = noise;
  for (std::size_t j = 0; j < s.clusters.size(); ++j)
    if (j != k) interference += stream(j);
  return stream(k) / interference;
}

/// Tiny power-allocation instance described by raw complex scalars:
/// desired[k][t] = C_{t,k}, cross[j][k][t] = D_{t j,k}.
struct TinyInstance {
  std::size_t num_ues = 1;
  std::vector<std::array<std::size_t, 2>> clusters;
  std::vector<std::array<cd, 2>> desired;
  std::vector<std::vector<std::array<cd, 2>>> cross;
  double noise = 1.0;
  double p_max = 1.0;  // per AP
  double p_static = 1.0;
  double eta = 0.4;
  double bandwidth = 1.0;

  /// p is (k, t) flattened as 2k + t.
  double ee(const std::vector<double>& p) const {
    double se = 0.0, tx = 0.0;
    for (std::size_t k = 0; k < num_ues; ++k) {
      const cd s = std::sqrt(p[2 * k]) * desired[k][0] + std::sqrt(p[2 * k + 1]) * desired[k][1];
      double b = noise;
      for (std::size_t j = 0; j < num_ues; ++j) {
        if (j == k) continue;
        b += std::norm(std::sqrt(p[2 * j]) * cross[j][k][0] + std::sqrt(p[2 * j + 1]) * cross[j][k][1]);
      }
      se += std::log2(1.0 + std::norm(s) / b);
    }
    for (double v : p) tx += v;
    return bandwidth * se / (p_static + tx / eta);
  }

  bool within_caps(const std::vector<double>& p, std::size_t num_aps) const {
    std::vector<double> load(num_aps, 0.0);
    for (std::size_t k = 0; k < num_ues; ++k)
      for (std::size_t t = 0; t < 2; ++t) load[clusters[k][t]] += p[2 * k + t];
    for (double l : load)
      if (l > p_max * (1.0 + 1e-12)) return false;
    return true;
  }
};

/// Exhaustive search with `points` levels per variable on [0, p_max].
inline double grid_best_ee(const TinyInstance& inst, std::size_t points, std::size_t num_aps) {
  const std::size_t nv = 2 * inst.num_ues;
  std::vector<double> levels(points);
  for (std::size_t i = 0; i < points; ++i) levels[i] = inst.p_max * static_cast<double>(i) / static_cast<double>(points - 1);
  std::vector<std::size_t> idx(nv, 0);
  std::vector<double> p(nv, 0.0);
  double best = 0.0;
  for (;;) {
    for (std::size_t v = 0; v < nv; ++v) p[v] = levels[idx[v]];
    if (inst.within_caps(p, num_aps)) best = std::max(best, inst.ee(p));
    std::size_t v = 0;
    while (v < nv && ++idx[v] == points) idx[v++] = 0;
    if (v == nv) break;
  }
  return best;
}

/// Best desired power |sum_t sqrt(p_t) (r_t q_t + sum_i conj(g_i) e^{j theta_i} (H_t q_t)_i)|^2
/// over all `levels`^N phase configurations.
inline double quantized_best_power(const Eigen::VectorXcd& g, const std::vector<Eigen::VectorXcd>& incident,
                                   const std::vector<cd>& direct, const std::vector<double>& powers, int levels) {
  const auto n = static_cast<std::size_t>(g.size());
  std::vector<int> idx(n, 0);
  double best = 0.0;
  for (;;) {
    cd total = 0.0;
    for (std::size_t t = 0; t < direct.size(); ++t) {
      cd a = direct[t];
      for (std::size_t i = 0; i < n; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        a += std::conj(g(ii)) * std::polar(1.0, 2.0 * M_PI * idx[i] / levels) * incident[t](ii);
      }
      total += std::sqrt(powers[t]) * a;
    }
    best = std::max(best, std::norm(total));
    std::size_t v = 0;
    while (v < n && ++idx[v] == levels) idx[v++] = 0;
    if (v == n) break;
  }
  return best;
}

/// Mean and standard error of a sample.
inline std::pair<double, double> mean_stderr(const std::vector<double>& x) {
  double m = 0.0;
  for (double v : x) m += v;
  m /= static_cast<double>(x.size());
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  const double n = static_cast<double>(x.size());
  return {m, x.size() > 1 ? std::sqrt(s / (n - 1.0) / n) : 0.0};
}

}  // namespace oracle
