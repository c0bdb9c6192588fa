#include "varlab/regression.hpp"

#include <cmath>
#include <string>

namespace varlab {
namespace {

// Smallest-to-largest eigenvalue ratio of the column-normalized Gram matrix.
double conditioning(const Eigen::MatrixXd& gram) {
  const Eigen::VectorXd scale = gram.diagonal().cwiseSqrt();
  if ((scale.array() <= 0.0).any()) return 0.0;
  const Eigen::VectorXd inv = scale.cwiseInverse();
  const Eigen::MatrixXd normalized = inv.asDiagonal() * gram * inv.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(normalized, Eigen::EigenvaluesOnly);
  const auto& ev = eig.eigenvalues();
  return ev(0) / ev(ev.size() - 1);
}

constexpr double kConditionFloor = 1e-12;

}  // namespace

RegressionResult least_squares(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                               std::span<const double> weights) {
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  if (Y.rows() != n) throw PreconditionError("least_squares: row count mismatch");
  if (!weights.empty() && static_cast<Eigen::Index>(weights.size()) != n) {
    throw PreconditionError("least_squares: weight count mismatch");
  }
  if (n <= p) throw RankDeficiencyError("least_squares: fewer observations than regressors");

  Eigen::VectorXd w = weights.empty()
                          ? Eigen::VectorXd::Ones(n)
                          : Eigen::Map<const Eigen::VectorXd>(weights.data(), n).eval();
  const Eigen::MatrixXd wx = w.asDiagonal() * X;
  const Eigen::MatrixXd gram = X.transpose() * wx;
  if (!(conditioning(gram) > kConditionFloor)) {
    throw RankDeficiencyError("least_squares: normal equations are singular (" +
                              std::to_string(p) + " regressors); shrink the feature set");
  }
  const Eigen::LDLT<Eigen::MatrixXd> solver(gram);
  const Eigen::MatrixXd gram_inv = solver.solve(Eigen::MatrixXd::Identity(p, p));

  RegressionResult r;
  r.coefficients = solver.solve(wx.transpose() * Y);
  r.fitted = X * r.coefficients;
  const Eigen::MatrixXd resid = Y - r.fitted;
  r.std_errors.resize(p, Y.cols());
  r.residual_sd.resize(Y.cols());
  const double total_w = w.sum();
  const double correction = static_cast<double>(n) / static_cast<double>(n - p);
  for (Eigen::Index q = 0; q < Y.cols(); ++q) {
    const Eigen::VectorXd we = w.cwiseProduct(resid.col(q));
    const Eigen::MatrixXd xe = X.array().colwise() * we.array();
    const Eigen::MatrixXd meat = xe.transpose() * xe;
    const Eigen::MatrixXd cov = correction * gram_inv * meat * gram_inv;
    r.std_errors.col(q) = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
    const double ss = (w.array() * resid.col(q).array().square()).sum();
    r.residual_sd(q) = std::sqrt(ss / (total_w * (1.0 - static_cast<double>(p) /
                                                              static_cast<double>(n))));
  }
  return r;
}

std::vector<Eigen::Index> independent_columns(const Eigen::MatrixXd& X, Eigen::Index required) {
  const Eigen::MatrixXd gram = X.transpose() * X;
  std::vector<Eigen::Index> kept;
  auto sub_ok = [&](const std::vector<Eigen::Index>& cols) {
    Eigen::MatrixXd g(cols.size(), cols.size());
    for (std::size_t a = 0; a < cols.size(); ++a) {
      for (std::size_t b = 0; b < cols.size(); ++b) g(a, b) = gram(cols[a], cols[b]);
    }
    return conditioning(g) > kConditionFloor * 10.0;
  };
  for (Eigen::Index c = 0; c < required; ++c) kept.push_back(c);
  if (required > 0 && !sub_ok(kept)) {
    throw RankDeficiencyError("independent_columns: required columns are collinear");
  }
  for (Eigen::Index c = required; c < X.cols(); ++c) {
    kept.push_back(c);
    if (!sub_ok(kept)) kept.pop_back();
  }
  return kept;
}

double max_abs_z(const RegressionResult& r) {
  double worst = 0.0;
  for (Eigen::Index q = 0; q < r.coefficients.cols(); ++q) {
    for (Eigen::Index k = 0; k < r.coefficients.rows(); ++k) {
      const double se = std::max(r.std_errors(k, q), kStatisticSeFloor);
      worst = std::max(worst, std::abs(r.coefficients(k, q)) / se);
    }
  }
  return worst;
}

}  // namespace varlab
