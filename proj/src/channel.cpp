// SPDX-License-Identifier: Apache-2.0
#include "risdmimo/channel.hpp"

#include "risdmimo/npy.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>

namespace risdmimo {

std::string to_string(Reception mode) { return mode == Reception::Coherent ? "C" : "NC"; }

Reception reception_from_string(const std::string& s) {
  if (s == "C" || s == "coherent") return Reception::Coherent;
  if (s == "NC" || s == "non_coherent" || s == "noncoherent") return Reception::NonCoherent;
  throw std::invalid_argument("unknown reception mode '" + s + "'");
}

double ChannelParams::noise_power_w() const {
  return dbm_to_watt(noise_psd_dbm_hz + 10.0 * std::log10(bandwidth_hz));
}

double pathloss_db(double d3d_m, double fc_ghz, bool los) {
  if (!(fc_ghz > 0.0)) throw std::invalid_argument("pathloss_db: carrier frequency must be positive");
  if (d3d_m < 1.0) {
    std::clog << "pathloss_db: distance " << d3d_m << " m clamped to 1 m\n";
    d3d_m = 1.0;
  }
  const double pl_los = 32.4 + 17.3 * std::log10(d3d_m) + 20.0 * std::log10(fc_ghz);
  if (los) return pl_los;
  const double pl_nlos = 17.3 + 38.3 * std::log10(d3d_m) + 24.9 * std::log10(fc_ghz);
  return std::max(pl_los, pl_nlos);
}

double los_probability(double d2d_m) {
  if (d2d_m <= 5.0) return 1.0;
  if (d2d_m <= 49.0) return std::exp(-(d2d_m - 5.0) / 70.8);
  return 0.54 * std::exp(-(d2d_m - 49.0) / 211.7);
}

double azimuth(const Point3& from, const Point3& to) {
  const Point3 d = to - from;
  return std::atan2(d.y(), d.x());
}

LinkLargeScale draw_link(const Point3& tx, const Point3& rx, double antenna_gain_db, const ChannelParams& params,
                         Rng& rng) {
  const double d2d = (rx - tx).head<2>().norm();
  const double d3d = (rx - tx).norm();
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  LinkLargeScale ls;
  ls.is_los = u01(rng) < los_probability(d2d);
  const double sigma = ls.is_los ? params.shadow_los_db : params.shadow_nlos_db;
  ls.shadowing_db = sigma * gauss(rng);
  ls.pathloss_db = pathloss_db(d3d, params.carrier_ghz, ls.is_los) + ls.shadowing_db;
  ls.beta = db_to_linear(antenna_gain_db - ls.pathloss_db);
  ls.kappa = ls.is_los ? db_to_linear(params.rician_k_db) : 0.0;
  return ls;
}

MatrixXcd rician_channel(const LinkLargeScale& ls, double theta_r, double theta_t, std::size_t nr, std::size_t nt,
                         Rng& rng) {
  if (!(ls.beta > 0.0) || !(ls.kappa >= 0.0)) throw std::invalid_argument("rician_channel: invalid large-scale state");
  const auto rows = static_cast<Eigen::Index>(nr);
  const auto cols = static_cast<Eigen::Index>(nt);
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
  MatrixXcd w(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      w(i, j) = cd(re, im);
    }
  }
  const double los_w = std::isinf(ls.kappa) ? 1.0 : std::sqrt(ls.kappa / (ls.kappa + 1.0));
  const double nlos_w = std::isinf(ls.kappa) ? 0.0 : std::sqrt(1.0 / (ls.kappa + 1.0));
  MatrixXcd h = nlos_w * w;
  if (los_w > 0.0) {
    const VectorXcd ar = steering_vector(theta_r, nr);
    const VectorXcd at = steering_vector(theta_t, nt);
    h.noalias() += (los_w * std::sqrt(static_cast<double>(nr * nt))) * (ar * at.adjoint());
  }
  return std::sqrt(ls.beta) * h;
}

MatrixXcd rician_channel(const LinkLargeScale& ls, double theta_r, double theta_t, std::size_t nr, std::size_t nt,
                         std::uint64_t seed) {
  Rng rng(seed);
  return rician_channel(ls, theta_r, theta_t, nr, nt, rng);
}

Eigen::MatrixXd LargeScaleSet::direct_gains() const {
  Eigen::MatrixXd g(static_cast<Eigen::Index>(num_ues), static_cast<Eigen::Index>(num_aps));
  for (std::size_t k = 0; k < num_ues; ++k)
    for (std::size_t n = 0; n < num_aps; ++n)
      g(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n)) = direct(n, k).beta;
  return g;
}

Eigen::MatrixXd LargeScaleSet::cascade_gains(const std::vector<ApPair>& clusters) const {
  if (clusters.size() != num_ues) throw std::invalid_argument("cascade_gains: one cluster per UE required");
  Eigen::MatrixXd g(static_cast<Eigen::Index>(num_ues), static_cast<Eigen::Index>(num_ris));
  for (std::size_t k = 0; k < num_ues; ++k) {
    const std::size_t strongest = clusters[k][0];
    for (std::size_t m = 0; m < num_ris; ++m)
      g(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(m)) = to_ris(strongest, m).beta * from_ris(m, k).beta;
  }
  return g;
}

LargeScaleSet draw_large_scale(const ScenarioInstance& s, const ChannelParams& params, std::uint64_t seed) {
  LargeScaleSet out;
  out.num_aps = s.num_aps();
  out.num_ris = s.num_ris();
  out.num_ues = s.num_active();
  const double g_direct = params.gain_tx_db + params.gain_rx_db;
  const double g_ap_ris = params.gain_tx_db + params.gain_ris_db;
  const double g_ris_ue = params.gain_ris_db + params.gain_rx_db;

  out.ap_ue.reserve(out.num_aps * out.num_ues);
  for (std::size_t n = 0; n < out.num_aps; ++n) {
    for (std::size_t k = 0; k < out.num_ues; ++k) {
      Rng rng(derive_seed(seed, {tag(Stream::LargeScaleApUe), n, s.active_ues[k]}));
      out.ap_ue.push_back(draw_link(s.ap_positions[n], s.active_position(k), g_direct, params, rng));
    }
  }
  out.ap_ris.reserve(out.num_aps * out.num_ris);
  for (std::size_t n = 0; n < out.num_aps; ++n) {
    for (std::size_t m = 0; m < out.num_ris; ++m) {
      Rng rng(derive_seed(seed, {tag(Stream::LargeScaleApRis), n, m}));
      out.ap_ris.push_back(draw_link(s.ap_positions[n], s.ris_positions[m], g_ap_ris, params, rng));
    }
  }
  out.ris_ue.reserve(out.num_ris * out.num_ues);
  for (std::size_t m = 0; m < out.num_ris; ++m) {
    for (std::size_t k = 0; k < out.num_ues; ++k) {
      Rng rng(derive_seed(seed, {tag(Stream::LargeScaleRisUe), m, s.active_ues[k]}));
      out.ris_ue.push_back(draw_link(s.ris_positions[m], s.active_position(k), g_ris_ue, params, rng));
    }
  }
  return out;
}

ChannelSet draw_channels(const ScenarioInstance& s, const LargeScaleSet& large, const ChannelParams& params,
                         std::uint64_t seed) {
  ChannelSet c;
  c.num_aps = large.num_aps;
  c.num_ris = large.num_ris;
  c.num_ues = large.num_ues;
  c.ap_antennas = params.ap_antennas;
  c.ris_elements = params.ris_elements;
  c.large_scale = large;

  c.ap_ris.reserve(c.num_aps * c.num_ris);
  for (std::size_t n = 0; n < c.num_aps; ++n) {
    for (std::size_t m = 0; m < c.num_ris; ++m) {
      const Point3& ap = s.ap_positions[n];
      const Point3& ris = s.ris_positions[m];
      c.ap_ris.push_back(rician_channel(large.to_ris(n, m), azimuth(ris, ap), azimuth(ap, ris), c.ris_elements,
                                        c.ap_antennas, derive_seed(seed, {tag(Stream::SmallScaleApRis), n, m})));
    }
  }
  c.ris_ue.reserve(c.num_ris * c.num_ues);
  for (std::size_t m = 0; m < c.num_ris; ++m) {
    for (std::size_t k = 0; k < c.num_ues; ++k) {
      const Point3& ris = s.ris_positions[m];
      const Point3& ue = s.active_position(k);
      // RIS -> UE is a 1 x N_RIS channel; g is its Hermitian.
      const MatrixXcd row = rician_channel(large.from_ris(m, k), azimuth(ue, ris), azimuth(ris, ue), 1,
                                           c.ris_elements,
                                           derive_seed(seed, {tag(Stream::SmallScaleRisUe), m, s.active_ues[k]}));
      c.ris_ue.emplace_back(row.adjoint());
    }
  }
  c.ap_ue.reserve(c.num_aps * c.num_ues);
  for (std::size_t n = 0; n < c.num_aps; ++n) {
    for (std::size_t k = 0; k < c.num_ues; ++k) {
      const Point3& ap = s.ap_positions[n];
      const Point3& ue = s.active_position(k);
      const MatrixXcd row = rician_channel(large.direct(n, k), azimuth(ue, ap), azimuth(ap, ue), 1, c.ap_antennas,
                                           derive_seed(seed, {tag(Stream::SmallScaleApUe), n, s.active_ues[k]}));
      c.ap_ue.emplace_back(row.row(0));
    }
  }
  return c;
}

RisConfig RisConfig::zeros(std::size_t num_ris, std::size_t elements) {
  RisConfig r;
  r.phases.assign(num_ris, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(elements)));
  return r;
}

RisConfig RisConfig::random(std::size_t num_ris, std::size_t elements, std::uint64_t seed) {
  RisConfig r = zeros(num_ris, elements);
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  for (auto& p : r.phases)
    for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = u(rng);
  return r;
}

VectorXcd RisConfig::reflection(std::size_t m) const {
  const Eigen::VectorXd& th = phases.at(m);
  VectorXcd phi(th.size());
  for (Eigen::Index i = 0; i < th.size(); ++i) phi(i) = std::polar(1.0, th(i));
  return phi;
}

PhaseOffsets PhaseOffsets::zeros(std::size_t num_aps, std::size_t num_ues) {
  return {Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(num_aps), static_cast<Eigen::Index>(num_ues))};
}

PhaseOffsets PhaseOffsets::random(std::size_t num_aps, std::size_t num_ues, std::uint64_t seed) {
  PhaseOffsets o = zeros(num_aps, num_ues);
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  for (Eigen::Index j = 0; j < o.delta.cols(); ++j)
    for (Eigen::Index i = 0; i < o.delta.rows(); ++i) o.delta(i, j) = u(rng);
  return o;
}

RowVectorXcd effective_channel(const ChannelSet& c, std::size_t n, std::size_t k, std::size_t ris,
                               const RisConfig& config, const PhaseOffsets& offsets, Reception mode) {
  if (n >= c.num_aps || k >= c.num_ues) throw std::out_of_range("effective_channel: AP or UE index out of range");
  RowVectorXcd h = c.r(n, k);
  if (ris != kNoRis) {
    if (ris >= c.num_ris || ris >= config.size()) throw std::out_of_range("effective_channel: RIS index out of range");
    const VectorXcd phi = config.reflection(ris);
    const VectorXcd& g = c.g(ris, k);
    const MatrixXcd& H = c.H(n, ris);
    if (phi.size() != g.size() || H.rows() != g.size() || H.cols() != h.size()) {
      throw std::invalid_argument("effective_channel: dimension mismatch between RIS config and channels");
    }
    h += reflected_row<double>(g, phi, H);
  }
  if (mode == Reception::NonCoherent) {
    h *= std::polar(1.0, offsets.delta(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k)));
  }
  return h;
}

void export_channels(const ChannelSet& c, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path root(dir);

  std::vector<cd> h;
  h.reserve(c.num_aps * c.num_ris * c.ris_elements * c.ap_antennas);
  for (std::size_t n = 0; n < c.num_aps; ++n)
    for (std::size_t m = 0; m < c.num_ris; ++m)
      for (Eigen::Index i = 0; i < c.H(n, m).rows(); ++i)
        for (Eigen::Index j = 0; j < c.H(n, m).cols(); ++j) h.push_back(c.H(n, m)(i, j));
  npy::write((root / "H_ap_ris.npy").string(), {c.num_aps, c.num_ris, c.ris_elements, c.ap_antennas}, h);

  std::vector<cd> g;
  for (std::size_t m = 0; m < c.num_ris; ++m)
    for (std::size_t k = 0; k < c.num_ues; ++k)
      for (Eigen::Index i = 0; i < c.g(m, k).size(); ++i) g.push_back(c.g(m, k)(i));
  npy::write((root / "g_ris_ue.npy").string(), {c.num_ris, c.num_ues, c.ris_elements}, g);

  std::vector<cd> r;
  for (std::size_t n = 0; n < c.num_aps; ++n)
    for (std::size_t k = 0; k < c.num_ues; ++k)
      for (Eigen::Index i = 0; i < c.r(n, k).size(); ++i) r.push_back(c.r(n, k)(i));
  npy::write((root / "r_ap_ue.npy").string(), {c.num_aps, c.num_ues, c.ap_antennas}, r);

  const LargeScaleSet& ls = c.large_scale;
  auto betas = [](const std::vector<LinkLargeScale>& links) {
    std::vector<double> b;
    b.reserve(links.size());
    for (const auto& l : links) b.push_back(l.beta);
    return b;
  };
  npy::write((root / "beta_ap_ue.npy").string(), {ls.num_aps, ls.num_ues}, betas(ls.ap_ue));
  npy::write((root / "beta_ap_ris.npy").string(), {ls.num_aps, ls.num_ris}, betas(ls.ap_ris));
  npy::write((root / "beta_ris_ue.npy").string(), {ls.num_ris, ls.num_ues}, betas(ls.ris_ue));
}

}  // namespace risdmimo
