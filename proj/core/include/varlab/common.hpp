#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace varlab {

/// Largest state dimension supported by the small fixed-capacity vector types.
inline constexpr int kMaxDim = 4;

/// State-space vector with inline storage (no heap allocation per evaluation).
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
/// d x d matrix with inline storage.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite coefficient or map evaluation during simulation / transformation.
class SimulationError : public Error {
 public:
  using Error::Error;
};

/// Singular normal equations in a least-squares fit.
class RankDeficiencyError : public Error {
 public:
  using Error::Error;
};

/// Grid incompatibility (divisibility, horizon, step count).
class GridError : public Error {
 public:
  using Error::Error;
};

/// A shift or process bound to a different ensemble than the one supplied.
class BindingError : public Error {
 public:
  using Error::Error;
};

/// Precondition on an argument violated (endpoint-zero, sizes, sample counts).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

inline Vec zero_vec(std::size_t d) { return Vec::Zero(static_cast<Eigen::Index>(d)); }
inline Mat zero_mat(std::size_t d) {
  return Mat::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
}
inline Mat identity_mat(std::size_t d) {
  return Mat::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
}

}  // namespace varlab
