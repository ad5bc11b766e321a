// SPDX-License-Identifier: Apache-2.0
#include "risdmimo/validation.hpp"

#include "risdmimo/config.hpp"
#include "risdmimo/harness.hpp"
#include "risdmimo/optimizer.hpp"
#include "risdmimo/power.hpp"
#include "risdmimo/rng.hpp"
#include "risdmimo/signal.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace risdmimo {
namespace {

CheckResult check(std::string name, bool ok, const std::string& detail) { return {std::move(name), ok, detail}; }

CheckResult power_model() {
  NetworkSize n;
  PowerModelParams p;
  const PowerBreakdown c = static_power(n, p);
  p.controller = ControllerMode::PerRis;
  const PowerBreakdown r = static_power(n, p);
  const double err = std::max({std::abs(c.p_trxc - 9.1), std::abs(c.p_fix_total - 7.875),
                               std::abs(c.p_ris - 7.35232), std::abs(r.p_ris - 50.55232)});
  std::ostringstream os;
  os << "max abs error " << err << " W";
  return check("power model reference values", err <= 1e-6, os.str());
}

CheckResult minorization(std::uint64_t seed) {
  Rng rng(derive_seed(seed, {101}));
  std::uniform_real_distribution<double> u(0.0, 10.0);
  double worst_tight = 0.0, worst_excess = -1.0;
  for (int i = 0; i < 2000; ++i) {
    const double a = u(rng), b = 0.1 + u(rng), y = u(rng);
    const double se = std::log2(1.0 + a / b);
    worst_tight = std::max(worst_tight, std::abs(surrogate_se(a, b, std::sqrt(a) / b) - se));
    const double arg = 1.0 + 2.0 * y * std::sqrt(a) - y * y * b;
    if (arg > 0.0) worst_excess = std::max(worst_excess, std::log2(arg) - se);
  }
  std::ostringstream os;
  os << "tightness error " << worst_tight << ", max excess " << worst_excess;
  return check("surrogate tight and minorizing", worst_tight <= 1e-12 && worst_excess <= 1e-12, os.str());
}

CheckResult compact_vs_direct(std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.channel.ris_elements = 16;
  const DropRealization d = realize_drop(cfg.scenario, cfg.channel, drop_seed(seed, 7));
  const PrecoderSet q = mrt_precoders(d.scenario, d.channels, d.random_ris);
  const double noise = cfg.channel.noise_power_w();
  const EffectiveConstants c =
      build_constants(d.scenario, d.channels, d.random_ris, d.offsets, q, Reception::NonCoherent, noise);
  const PowerAllocation a = equal_power(d.scenario.clusters, Eigen::VectorXd::Constant(9, 1.0));
  const std::size_t K = d.scenario.num_active();
  double worst = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    auto rx = [&](std::size_t j) {
      cd s = 0.0;
      for (std::size_t t = 0; t < 2; ++t) {
        const std::size_t n = d.scenario.clusters[j][t];
        const RowVectorXcd h = effective_channel(d.channels, n, k, d.scenario.ris_assoc[k], d.random_ris, d.offsets,
                                                 Reception::NonCoherent);
        s += std::sqrt(a.p(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(t))) * (h * q.q[j][t])(0);
      }
      return std::norm(s);
    };
    double interf = noise;
    for (std::size_t j = 0; j < K; ++j)
      if (j != k) interf += rx(j);
    const double direct = rx(k) / interf;
    const double compact = sinr(k, a, c);
    worst = std::max(worst, std::abs(direct - compact) / std::max(direct, 1e-300));
  }
  std::ostringstream os;
  os << "max relative SINR mismatch " << worst;
  return check("compact SINR equals direct signal model", worst <= 1e-10, os.str());
}

CheckResult ao_monotone(std::uint64_t seed, std::size_t drops) {
  ExperimentConfig cfg;
  cfg.drops = drops;
  cfg.master_seed = seed;
  const SweepPoint pt = expand_sweep(cfg).front();
  std::size_t violations = 0, infeasible = 0;
  double worst_cap = -1.0;
  for (std::size_t d = 0; d < drops; ++d) {
    const DropOutcome o = run_drop(cfg, pt, drop_seed(seed, d));
    if (!o.feasible) {
      ++infeasible;
      continue;
    }
    violations += o.trace_violations;
    worst_cap = std::max(worst_cap, o.p_tx - dbm_to_watt(pt.p_t_dbm) * static_cast<double>(pt.num_aps));
  }
  std::ostringstream os;
  os << violations << " trace violations over " << drops << " drops (" << infeasible << " infeasible)";
  return check("AO trace nondecreasing", violations == 0 && infeasible == 0 && worst_cap <= 1e-12, os.str());
}

CheckResult alignment(std::uint64_t seed) {
  Rng rng(derive_seed(seed, {202}));
  std::normal_distribution<double> n01(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    VectorXcd g(8), inc(8);
    for (Eigen::Index e = 0; e < 8; ++e) {
      g(e) = {n01(rng), n01(rng)};
      inc(e) = {n01(rng), n01(rng)};
    }
    const cd direct{n01(rng), n01(rng)};
    const Eigen::VectorXd th = align_phases(g, inc, std::arg(direct));
    cd total = direct;
    double bound = std::abs(direct);
    for (Eigen::Index e = 0; e < 8; ++e) {
      total += std::conj(g(e)) * std::polar(1.0, th(e)) * inc(e);
      bound += std::abs(g(e)) * std::abs(inc(e));
    }
    worst = std::max(worst, std::abs(std::abs(total) - bound) / bound);
  }
  std::ostringstream os;
  os << "max relative gap to triangle bound " << worst;
  return check("RIS alignment reaches the triangle bound", worst <= 1e-12, os.str());
}

}  // namespace

std::vector<CheckResult> run_invariant_suite(std::uint64_t seed, std::size_t drops) {
  std::vector<CheckResult> out;
  out.push_back(power_model());
  out.push_back(minorization(seed));
  out.push_back(compact_vs_direct(seed));
  out.push_back(alignment(seed));
  out.push_back(ao_monotone(seed, drops));
  return out;
}

}  // namespace risdmimo
