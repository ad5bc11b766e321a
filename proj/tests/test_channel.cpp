// SPDX-License-Identifier: Apache-2.0
#include "risdmimo/channel.hpp"

#include "risdmimo/harness.hpp"
#include "risdmimo/npy.hpp"
#include "risdmimo/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

using namespace risdmimo;

namespace {

LinkLargeScale link(double beta, double kappa) {
  LinkLargeScale ls;
  ls.beta = beta;
  ls.kappa = kappa;
  ls.is_los = kappa > 0.0;
  return ls;
}

}  // namespace

TEST(Pathloss, HandValues) {
  EXPECT_NEAR(pathloss_db(10.0, 4.0, true), 32.4 + 17.3 + 20.0 * std::log10(4.0), 1e-12);
  EXPECT_NEAR(pathloss_db(10.0, 4.0, true), 61.74, 5e-3);
  EXPECT_DOUBLE_EQ(pathloss_db(1.0, 1.0, true), 32.4);
  // NLOS branch dominates at 50 m: 17.3 + 38.3 log10(50) + 24.9 log10(4) = 97.3618.
  EXPECT_NEAR(pathloss_db(50.0, 4.0, false), 17.3 + 38.3 * std::log10(50.0) + 24.9 * std::log10(4.0), 1e-12);
  EXPECT_NEAR(pathloss_db(50.0, 4.0, false), 97.3618, 1e-4);
  EXPECT_GT(pathloss_db(50.0, 4.0, false), pathloss_db(50.0, 4.0, true));
}

TEST(Pathloss, ClampsShortDistances) {
  EXPECT_DOUBLE_EQ(pathloss_db(0.2, 4.0, true), pathloss_db(1.0, 4.0, true));
  EXPECT_THROW(pathloss_db(10.0, 0.0, true), std::invalid_argument);
}

TEST(Pathloss, MonotoneAndNlosAboveLos) {
  double prev_l = -1e9, prev_n = -1e9;
  for (double d = 1.0; d < 300.0; d *= 1.1) {
    const double l = pathloss_db(d, 4.0, true), n = pathloss_db(d, 4.0, false);
    EXPECT_GE(l, prev_l);
    EXPECT_GE(n, prev_n);
    EXPECT_GE(n, l);
    prev_l = l;
    prev_n = n;
  }
}

TEST(LosProbability, BranchesAndContinuity) {
  EXPECT_DOUBLE_EQ(los_probability(3.0), 1.0);
  EXPECT_NEAR(los_probability(20.0), std::exp(-15.0 / 70.8), 1e-15);
  EXPECT_NEAR(los_probability(20.0), 0.809, 1e-3);
  EXPECT_NEAR(los_probability(49.0), 0.537, 1e-3);
  EXPECT_NEAR(los_probability(49.0 + 1e-9), 0.54, 1e-6);
  double prev = 1.0;
  for (double d = 0.0; d < 400.0; d += 0.5) {
    const double p = los_probability(d);
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
    // The curve has a small upward step at the 49 m breakpoint.
    if (std::abs(d - 49.5) > 0.6) EXPECT_LE(p, prev + 1e-15) << d;
    prev = p;
  }
}

TEST(SteeringVector, HandValues) {
  const VectorXcd a = steering_vector(0.0, 4);
  for (Eigen::Index i = 0; i < 4; ++i) EXPECT_NEAR(std::abs(a(i) - cd(0.5, 0.0)), 0.0, 1e-15);
  const VectorXcd b = steering_vector(kPi / 2.0, 2);
  EXPECT_NEAR(std::abs(b(0) - cd(1.0 / std::sqrt(2.0), 0.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(b(1) - cd(-1.0 / std::sqrt(2.0), 0.0)), 0.0, 1e-15);
}

TEST(SteeringVector, UnitNorm) {
  Rng rng(1);
  std::uniform_real_distribution<double> th(-kPi, kPi);
  for (std::size_t n : {1, 2, 3, 8, 64, 256}) EXPECT_NEAR(steering_vector(th(rng), n).norm(), 1.0, 1e-12);
}

TEST(RicianChannel, LosLimitIsRankOneSteering) {
  const double beta = 2e-5;
  const MatrixXcd h = rician_channel(link(beta, 1e9), 0.3, -0.8, 6, 4, std::uint64_t{5});
  // The LoS term carries unit-modulus entries: H / sqrt(beta) = sqrt(Nr Nt) a_r a_t^H.
  const MatrixXcd ref = std::sqrt(24.0) * steering_vector(0.3, 6) * steering_vector(-0.8, 4).adjoint();
  EXPECT_LT((h / std::sqrt(beta) - ref).cwiseAbs().maxCoeff(), 1e-4);
  Eigen::JacobiSVD<MatrixXcd> svd(h);
  EXPECT_LT(svd.singularValues()(1) / svd.singularValues()(0), 1e-4);
  const MatrixXcd inf = rician_channel(link(beta, std::numeric_limits<double>::infinity()), 0.3, -0.8, 6, 4, std::uint64_t{5});
  EXPECT_LT((inf / std::sqrt(beta) - ref).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(RicianChannel, RayleighMoment) {
  const double beta = 3.0;
  Rng rng(17);
  double acc = 0.0;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) acc += std::norm(rician_channel(link(beta, 0.0), 0.0, 0.0, 1, 1, rng)(0, 0));
  EXPECT_NEAR(acc / draws / beta, 1.0, 0.02);
}

TEST(RicianChannel, FrobeniusMomentForAnyKappa) {
  for (double kappa : {0.0, db_to_linear(5.0), 30.0}) {
    Rng rng(23);
    const double beta = 0.5;
    double acc = 0.0;
    std::vector<double> per_entry(6, 0.0);
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) {
      const MatrixXcd h = rician_channel(link(beta, kappa), 0.4, 1.1, 3, 2, rng);
      acc += h.squaredNorm();
      for (Eigen::Index e = 0; e < 6; ++e) per_entry[e] += std::norm(h.data()[e]);
    }
    EXPECT_NEAR(acc / draws / (beta * 6.0), 1.0, 0.02) << kappa;
    for (double v : per_entry) EXPECT_NEAR(v / draws / beta, 1.0, 0.02) << kappa;
  }
}

TEST(RicianChannel, DeterministicAndRejectsBadState) {
  const MatrixXcd a = rician_channel(link(1.0, 2.0), 0.1, 0.2, 4, 3, std::uint64_t{9});
  const MatrixXcd b = rician_channel(link(1.0, 2.0), 0.1, 0.2, 4, 3, std::uint64_t{9});
  EXPECT_EQ(a, b);
  EXPECT_TRUE(a.allFinite());
  EXPECT_THROW(rician_channel(link(0.0, 1.0), 0.0, 0.0, 2, 2, std::uint64_t{1}), std::invalid_argument);
  EXPECT_THROW(rician_channel(link(1.0, -1.0), 0.0, 0.0, 2, 2, std::uint64_t{1}), std::invalid_argument);
}

TEST(DrawLink, ShadowingSpread) {
  ChannelParams p;
  Rng rng(31);
  const Point3 tx(0.0, 0.0, 3.0), rx(20.0, 0.0, 1.0);
  double s_los = 0.0, s_nlos = 0.0;
  int n_los = 0, n_nlos = 0;
  for (int i = 0; i < 200000; ++i) {
    const LinkLargeScale ls = draw_link(tx, rx, 0.0, p, rng);
    EXPECT_GT(ls.beta, 0.0);
    if (ls.is_los) {
      s_los += ls.shadowing_db * ls.shadowing_db;
      ++n_los;
      EXPECT_DOUBLE_EQ(ls.kappa, db_to_linear(5.0));
    } else {
      s_nlos += ls.shadowing_db * ls.shadowing_db;
      ++n_nlos;
      EXPECT_DOUBLE_EQ(ls.kappa, 0.0);
    }
    EXPECT_NEAR(ls.beta, db_to_linear(-ls.pathloss_db), 1e-12 * ls.beta);
  }
  EXPECT_NEAR(std::sqrt(s_los / n_los) / 3.0, 1.0, 0.02);
  EXPECT_NEAR(std::sqrt(s_nlos / n_nlos) / 8.03, 1.0, 0.02);
  EXPECT_NEAR(static_cast<double>(n_los) / 200000.0, los_probability(20.0), 0.01);
}

TEST(DrawLink, AntennaGainEntersBeta) {
  ChannelParams p;
  Rng a(3), b(3);
  const Point3 tx(0.0, 0.0, 3.0), rx(30.0, 10.0, 1.0);
  const LinkLargeScale l0 = draw_link(tx, rx, 0.0, p, a);
  const LinkLargeScale l7 = draw_link(tx, rx, 7.0, p, b);
  EXPECT_NEAR(l7.beta / l0.beta, db_to_linear(7.0), 1e-12);
}

TEST(RisConfig, UnitModulusReflection) {
  const RisConfig r = RisConfig::random(3, 64, 8);
  for (std::size_t m = 0; m < 3; ++m) {
    const VectorXcd phi = r.reflection(m);
    for (Eigen::Index i = 0; i < phi.size(); ++i) EXPECT_NEAR(std::abs(phi(i)), 1.0, 1e-15);
    for (Eigen::Index i = 0; i < r.phases[m].size(); ++i) {
      EXPECT_GE(r.phases[m](i), 0.0);
      EXPECT_LT(r.phases[m](i), kTwoPi);
    }
  }
}

TEST(RisConfig, PassivityPreservesNorm) {
  Rng rng(4);
  std::normal_distribution<double> n01;
  const RisConfig r = RisConfig::random(1, 32, 12);
  VectorXcd x(32);
  for (Eigen::Index i = 0; i < 32; ++i) x(i) = {n01(rng), n01(rng)};
  EXPECT_NEAR(r.reflection(0).cwiseProduct(x).norm(), x.norm(), 1e-12);
}

TEST(PhaseOffsets, ZeroOrUniform) {
  EXPECT_TRUE((PhaseOffsets::zeros(9, 10).delta.array() == 0.0).all());
  const PhaseOffsets o = PhaseOffsets::random(50, 200, 6);
  EXPECT_GE(o.delta.minCoeff(), 0.0);
  EXPECT_LT(o.delta.maxCoeff(), kTwoPi);
  EXPECT_NEAR(o.delta.mean(), kPi, 0.05);
}

namespace {

ChannelSet tiny_set() {
  ChannelSet c;
  c.num_aps = 1;
  c.num_ris = 1;
  c.num_ues = 1;
  c.ap_antennas = 1;
  c.ris_elements = 2;
  MatrixXcd H(2, 1);
  H << 1.0, 1.0;
  c.ap_ris.push_back(H);
  VectorXcd g(2);
  g << 1.0, 1.0;
  c.ris_ue.push_back(g);
  c.ap_ue.push_back(RowVectorXcd::Zero(1));
  return c;
}

}  // namespace

TEST(EffectiveChannel, DestructivePairCancels) {
  const ChannelSet c = tiny_set();
  RisConfig r = RisConfig::zeros(1, 2);
  r.phases[0](1) = kPi;
  const RowVectorXcd h = effective_channel(c, 0, 0, 0, r, PhaseOffsets::zeros(1, 1), Reception::Coherent);
  EXPECT_NEAR(std::abs(h(0)), 0.0, 1e-15);
  const RowVectorXcd h0 = effective_channel(c, 0, 0, 0, RisConfig::zeros(1, 2), PhaseOffsets::zeros(1, 1), Reception::Coherent);
  EXPECT_NEAR(std::abs(h0(0) - cd(2.0, 0.0)), 0.0, 1e-15);
}

TEST(EffectiveChannel, ZeroReflectorGivesDirectPath) {
  ChannelSet c = tiny_set();
  c.ris_ue[0].setZero();
  c.ap_ue[0](0) = cd(0.3, -0.2);
  const RowVectorXcd h = effective_channel(c, 0, 0, 0, RisConfig::zeros(1, 2), PhaseOffsets::zeros(1, 1), Reception::Coherent);
  EXPECT_EQ(h(0), cd(0.3, -0.2));
  const RowVectorXcd d = effective_channel(c, 0, 0, kNoRis, RisConfig::zeros(1, 2), PhaseOffsets::zeros(1, 1), Reception::Coherent);
  EXPECT_EQ(d(0), cd(0.3, -0.2));
}

TEST(EffectiveChannel, OffsetsOnlyInNonCoherentMode) {
  ChannelSet c = tiny_set();
  c.ap_ue[0](0) = cd(0.5, 0.1);
  PhaseOffsets off = PhaseOffsets::zeros(1, 1);
  off.delta(0, 0) = 1.3;
  const RisConfig r = RisConfig::random(1, 2, 3);
  const RowVectorXcd base = effective_channel(c, 0, 0, 0, r, PhaseOffsets::zeros(1, 1), Reception::Coherent);
  EXPECT_EQ(effective_channel(c, 0, 0, 0, r, off, Reception::Coherent), base);
  const RowVectorXcd nc = effective_channel(c, 0, 0, 0, r, off, Reception::NonCoherent);
  EXPECT_NEAR(std::abs(nc(0) - std::polar(1.0, 1.3) * base(0)), 0.0, 1e-15);
}

TEST(EffectiveChannel, RejectsMismatch) {
  const ChannelSet c = tiny_set();
  EXPECT_THROW(effective_channel(c, 0, 0, 0, RisConfig::zeros(1, 3), PhaseOffsets::zeros(1, 1), Reception::Coherent),
               std::invalid_argument);
  EXPECT_THROW(effective_channel(c, 1, 0, 0, RisConfig::zeros(1, 2), PhaseOffsets::zeros(1, 1), Reception::Coherent),
               std::out_of_range);
  EXPECT_THROW(effective_channel(c, 0, 0, 4, RisConfig::zeros(1, 2), PhaseOffsets::zeros(1, 1), Reception::Coherent),
               std::out_of_range);
}

TEST(DrawChannels, DimensionsFiniteAndDeterministic) {
  ScenarioParams sp;
  ChannelParams cp;
  cp.ris_elements = 16;
  const DropRealization a = realize_drop(sp, cp, 1234);
  const DropRealization b = realize_drop(sp, cp, 1234);
  const ChannelSet& c = a.channels;
  EXPECT_EQ(c.num_aps, 9u);
  EXPECT_EQ(c.num_ris, 10u);
  EXPECT_EQ(c.num_ues, 10u);
  for (std::size_t n = 0; n < c.num_aps; ++n)
    for (std::size_t m = 0; m < c.num_ris; ++m) {
      EXPECT_EQ(c.H(n, m).rows(), 16);
      EXPECT_EQ(c.H(n, m).cols(), 4);
      EXPECT_TRUE(c.H(n, m).allFinite());
      EXPECT_EQ(c.H(n, m), b.channels.H(n, m));
    }
  for (std::size_t k = 0; k < c.num_ues; ++k) {
    for (std::size_t m = 0; m < c.num_ris; ++m) EXPECT_EQ(c.g(m, k).size(), 16);
    for (std::size_t n = 0; n < c.num_aps; ++n) {
      EXPECT_EQ(c.r(n, k).size(), 4);
      EXPECT_EQ(c.r(n, k), b.channels.r(n, k));
    }
  }
}

TEST(DrawChannels, LargeScaleBetaMatchesPathloss) {
  const DropRealization d = realize_drop(ScenarioParams{}, ChannelParams{}, 77);
  ChannelParams p;
  for (const auto& ls : d.channels.large_scale.ap_ue) {
    EXPECT_GT(ls.beta, 0.0);
    EXPECT_NEAR(linear_to_db(ls.beta), p.gain_tx_db + p.gain_rx_db - ls.pathloss_db, 1e-9);
  }
  for (const auto& ls : d.channels.large_scale.ap_ris)
    EXPECT_NEAR(linear_to_db(ls.beta), p.gain_tx_db + p.gain_ris_db - ls.pathloss_db, 1e-9);
  for (const auto& ls : d.channels.large_scale.ris_ue)
    EXPECT_NEAR(linear_to_db(ls.beta), p.gain_ris_db + p.gain_rx_db - ls.pathloss_db, 1e-9);
}

TEST(ExportChannels, WritesNpyFiles) {
  ChannelParams cp;
  cp.ris_elements = 8;
  const DropRealization d = realize_drop(ScenarioParams{}, cp, 5);
  const auto dir = std::filesystem::temp_directory_path() / "risdmimo_export_test";
  std::filesystem::remove_all(dir);
  export_channels(d.channels, dir.string());
  for (const char* f : {"H_ap_ris.npy", "g_ris_ue.npy", "r_ap_ue.npy"}) {
    const auto path = dir / f;
    ASSERT_TRUE(std::filesystem::exists(path)) << f;
    std::ifstream in(path, std::ios::binary);
    char magic[6];
    in.read(magic, 6);
    EXPECT_EQ(std::string(magic + 1, 5), "NUMPY");
  }
  std::filesystem::remove_all(dir);
}
