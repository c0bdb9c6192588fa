#pragma once

#include "varlab/common.hpp"

#include <span>
#include <vector>

namespace varlab {

/// Weighted least squares of each column of Y on the columns of X with
/// heteroskedasticity-robust (sandwich) standard errors.
struct RegressionResult {
  Eigen::MatrixXd coefficients;  // p x q
  Eigen::MatrixXd std_errors;    // p x q
  Eigen::MatrixXd fitted;        // n x q
  Eigen::VectorXd residual_sd;   // q
};

/// Throws RankDeficiencyError when X^T W X is numerically singular.
RegressionResult least_squares(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                               std::span<const double> weights = {});

/// Column indices of X forming a maximal independent set, keeping the columns
/// in `required` first. Throws RankDeficiencyError if `required` alone is
/// rank deficient.
std::vector<Eigen::Index> independent_columns(const Eigen::MatrixXd& X,
                                              Eigen::Index required);

/// Absolute floor on standard errors when forming z statistics, so that
/// quantities that vanish identically (up to rounding) give z near zero.
inline constexpr double kStatisticSeFloor = 1e-12;

/// Largest |coefficient| / max(std_error, kStatisticSeFloor) over all entries.
double max_abs_z(const RegressionResult& r);

}  // namespace varlab
