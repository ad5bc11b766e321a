// SPDX-License-Identifier: Apache-2.0
#include "risdmimo/scenario.hpp"

#include "risdmimo/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace risdmimo {

void AreaSpec::validate() const {
  if (!(width_m > 0.0 && depth_m > 0.0 && ap_height_m > 0.0 && ue_height_m > 0.0 &&
        ris_height_m > 0.0)) {
    throw std::invalid_argument("AreaSpec: all dimensions must be strictly positive");
  }
}

bool AreaSpec::contains(const Point3& p) const {
  return p.x() >= 0.0 && p.x() <= width_m && p.y() >= 0.0 && p.y() <= depth_m && p.z() > 0.0;
}

GridShape grid_shape(const AreaSpec& area, std::size_t num_aps) {
  if (num_aps == 0) throw std::invalid_argument("place_aps: L must be at least 1");
  const double target = std::log(area.width_m / area.depth_m);
  GridShape best{num_aps, 1};
  double best_dist = std::abs(std::log(static_cast<double>(num_aps)) - target);
  for (std::size_t ny = 2; ny <= num_aps; ++ny) {
    if (num_aps % ny != 0) continue;
    const std::size_t nx = num_aps / ny;
    const double dist = std::abs(std::log(static_cast<double>(nx) / static_cast<double>(ny)) - target);
    if (dist < best_dist - 1e-12) {
      best = {nx, ny};
      best_dist = dist;
    }
  }
  return best;
}

Points3 place_aps(const AreaSpec& area, std::size_t num_aps) {
  area.validate();
  const GridShape g = grid_shape(area, num_aps);
  if (g.nx * g.ny != num_aps) {
    std::ostringstream os;
    os << "place_aps: L=" << num_aps << " is not expressible as an nx*ny grid";
    throw std::invalid_argument(os.str());
  }
  const double dx = area.width_m / static_cast<double>(g.nx);
  const double dy = area.depth_m / static_cast<double>(g.ny);
  Points3 out;
  out.reserve(num_aps);
  for (std::size_t iy = 0; iy < g.ny; ++iy) {
    for (std::size_t ix = 0; ix < g.nx; ++ix) {
      out.emplace_back(dx / 2.0 + dx * static_cast<double>(ix), dy / 2.0 + dy * static_cast<double>(iy),
                       area.ap_height_m);
    }
  }
  return out;
}

namespace {

Points3 uniform_points(const AreaSpec& area, std::size_t n, double height, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> ux(0.0, area.width_m);
  std::uniform_real_distribution<double> uy(0.0, area.depth_m);
  Points3 out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = ux(rng);
    const double y = uy(rng);
    out.emplace_back(x, y, height);
  }
  return out;
}

}  // namespace

Points3 place_ues(const AreaSpec& area, std::size_t num_ues, std::uint64_t seed) {
  area.validate();
  if (num_ues == 0) throw std::invalid_argument("place_ues: K must be at least 1");
  return uniform_points(area, num_ues, area.ue_height_m, seed);
}

Points3 place_ris(const AreaSpec& area, std::size_t num_ris, std::uint64_t seed) {
  area.validate();
  return uniform_points(area, num_ris, area.ris_height_m, seed);
}

std::vector<std::size_t> select_active(std::size_t num_ues, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("select_active: fraction must lie in (0, 1]");
  }
  // Guard against ceil(0.1*100) = 11 from representation error.
  const double exact = fraction * static_cast<double>(num_ues);
  auto count = static_cast<std::size_t>(std::ceil(exact - 1e-9));
  count = std::clamp<std::size_t>(count, 1, num_ues);

  std::vector<std::size_t> idx(num_ues);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, num_ues - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::vector<ApPair> cluster_aps(const Eigen::MatrixXd& gains, std::size_t slots_per_ap) {
  const auto num_ues = static_cast<std::size_t>(gains.rows());
  const auto num_aps = static_cast<std::size_t>(gains.cols());
  if (!gains.allFinite() || (gains.array() <= 0.0).any()) {
    throw std::invalid_argument("cluster_aps: gains must be finite and positive");
  }
  if (num_aps < 2) throw InfeasibleError("cluster_aps: at least two APs are required per cluster");
  if (2 * num_ues > num_aps * slots_per_ap) {
    std::ostringstream os;
    os << "cluster_aps: infeasible capacity, " << num_ues << " UEs need " << 2 * num_ues
       << " AP slots but only " << num_aps * slots_per_ap << " exist";
    throw InfeasibleError(os.str());
  }

  std::vector<std::size_t> order(num_ues);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return gains.row(static_cast<Eigen::Index>(a)).maxCoeff() >
           gains.row(static_cast<Eigen::Index>(b)).maxCoeff();
  });

  std::vector<std::size_t> load(num_aps, 0);
  std::vector<ApPair> clusters(num_ues);
  for (std::size_t k : order) {
    std::vector<std::size_t> aps(num_aps);
    std::iota(aps.begin(), aps.end(), 0);
    std::stable_sort(aps.begin(), aps.end(), [&](std::size_t a, std::size_t b) {
      return gains(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(a)) >
             gains(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(b));
    });
    std::size_t found = 0;
    for (std::size_t n : aps) {
      if (load[n] >= slots_per_ap) continue;
      clusters[k][found++] = n;
      if (found == 2) break;
    }
    if (found < 2) {
      std::ostringstream os;
      os << "cluster_aps: UE " << k << " finds fewer than two APs with free slots";
      throw InfeasibleError(os.str());
    }
    ++load[clusters[k][0]];
    ++load[clusters[k][1]];
  }
  return clusters;
}

std::vector<std::size_t> associate_ris(const Eigen::MatrixXd& cascade_gains) {
  if (!cascade_gains.allFinite() || (cascade_gains.array() < 0.0).any()) {
    throw std::invalid_argument("associate_ris: gains must be finite and nonnegative");
  }
  std::vector<std::size_t> out(static_cast<std::size_t>(cascade_gains.rows()), kNoRis);
  if (cascade_gains.cols() == 0) return out;
  for (Eigen::Index k = 0; k < cascade_gains.rows(); ++k) {
    Eigen::Index best = 0;
    for (Eigen::Index m = 1; m < cascade_gains.cols(); ++m) {
      if (cascade_gains(k, m) > cascade_gains(k, best)) best = m;
    }
    out[static_cast<std::size_t>(k)] = static_cast<std::size_t>(best);
  }
  return out;
}

ScenarioInstance draw_layout(const ScenarioParams& params, std::uint64_t seed) {
  ScenarioInstance s;
  s.rng_seed = seed;
  s.ap_positions = place_aps(params.area, params.num_aps);
  s.ue_positions = place_ues(params.area, params.num_ues, derive_seed(seed, {tag(Stream::UePositions)}));
  s.ris_positions = place_ris(params.area, params.num_ris, derive_seed(seed, {tag(Stream::RisPositions)}));
  s.active_ues = select_active(params.num_ues, params.active_fraction,
                               derive_seed(seed, {tag(Stream::ActiveSet)}));
  return s;
}

std::vector<std::size_t> ap_loads(const std::vector<ApPair>& clusters, std::size_t num_aps) {
  std::vector<std::size_t> load(num_aps, 0);
  for (const auto& c : clusters) {
    ++load.at(c[0]);
    ++load.at(c[1]);
  }
  return load;
}

}  // namespace risdmimo
