// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace risdmimo {

template <typename Scalar>
using CVector = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;
template <typename Scalar>
using CRowVector = Eigen::Matrix<std::complex<Scalar>, 1, Eigen::Dynamic>;
template <typename Scalar>
using CMatrix = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;

using cd = std::complex<double>;
using VectorXcd = CVector<double>;
using RowVectorXcd = CRowVector<double>;
using MatrixXcd = CMatrix<double>;

using Point3 = Eigen::Vector3d;
using Points3 = std::vector<Point3>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Marker for "no RIS assists this UE" (RIS-absent deployments).
inline constexpr std::size_t kNoRis = static_cast<std::size_t>(-1);

enum class Reception { Coherent, NonCoherent };

/// Raised when a request is well-formed but has no admissible solution
/// (AP capacity, SINR floors).
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

/// Wraps an angle into [0, 2*pi).
inline double wrap_phase(double theta) {
  double w = std::fmod(theta, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  if (w >= kTwoPi) w = 0.0;
  return w;
}

std::string to_string(Reception mode);
Reception reception_from_string(const std::string& s);

}  // namespace risdmimo
