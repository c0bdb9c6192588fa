#pragma once

#include "varlab/characteristics.hpp"
#include "varlab/model.hpp"
#include "varlab/parallel.hpp"

#include <string>

namespace varlab {

/// Adapted Cameron-Martin direction given by its derivative hdot_t evaluated
/// on the path prefix up to t.
struct AdaptedShift {
  std::string name;
  std::size_t dim = 1;
  PrefixVectorFn derivative;
};

/// An adapted shift evaluated along every path of one ensemble:
/// hdot[i][j] for j < K and h[i][j] = sum_{k<j} hdot[i][k] dt, h[i][0] = 0.
class MaterializedShift {
 public:
  explicit MaterializedShift(const PathEnsemble& ensemble);

  std::uint64_t bound_to() const { return bound_to_; }
  const TimeGrid& grid() const { return grid_; }
  std::size_t n_paths() const { return n_paths_; }
  std::size_t dim() const { return dim_; }
  std::size_t steps() const { return steps_; }
  double horizon() const { return grid_.time(steps_); }

  Eigen::Map<const Eigen::VectorXd> hdot(std::size_t i, std::size_t j) const;
  Eigen::Map<Eigen::VectorXd> hdot(std::size_t i, std::size_t j);
  Eigen::Map<const Eigen::VectorXd> h(std::size_t i, std::size_t j) const;

  /// Recomputes h from hdot by left-rectangle cumulative sums. With
  /// snap_endpoint, h[i][K] is set to exactly zero (for operators whose
  /// output vanishes at the horizon in exact arithmetic).
  void integrate(bool snap_endpoint = false);

  /// Per-path |h|_H^2 = sum_j |hdot_j|^2 dt.
  double h_norm_sq(std::size_t i) const;
  /// Per-path sup_j |h_j| (Euclidean norm in R^d).
  double sup_norm(std::size_t i) const;
  /// Largest |h[i][K]| over paths.
  double max_endpoint() const;

  const std::vector<double>& hdot_data() const { return hdot_; }
  std::vector<double>& hdot_data() { return hdot_; }
  const std::vector<double>& h_data() const { return h_; }

 private:
  std::uint64_t bound_to_;
  TimeGrid grid_;
  std::size_t n_paths_;
  std::size_t dim_;
  std::size_t steps_;
  std::vector<double> hdot_;
  std::vector<double> h_;
};

/// Tolerance on |h_K| for a shift to count as endpoint-zero.
inline constexpr double kEndpointTolerance = 1e-10;

MaterializedShift materialize(const AdaptedShift& shift, const PathEnsemble& ensemble);

/// a u + b v, per path.
MaterializedShift combine(double a, const MaterializedShift& u, double b,
                          const MaterializedShift& v);

/// Monte Carlo estimate of E<u, v>_H (weighted by the ensemble weights).
MeanStderr h_inner(const PathEnsemble& ensemble, const MaterializedShift& u,
                   const MaterializedShift& v);

/// Delay operator: derivative n (u_{(k-1)/n} - u_{(k-2)/n}) on [k/n, (k+1)/n),
/// k = 2..n-1, and zero on [0, 2/n). Requires n >= 3 and n | M.
MaterializedShift delay_pn(const MaterializedShift& u, std::size_t n);
/// Terminal ramp: derivative n u_{1-2/n} on [1 - 1/n, 1]. Requires K = M.
MaterializedShift endpoint_qn(const MaterializedShift& u, std::size_t n);
/// r_n = p_n - q_n; vanishes at t = 1 on every path. Requires K = M.
MaterializedShift endpoint_rn(const MaterializedShift& u, std::size_t n);

/// Stop-and-recentre truncation of an endpoint-zero shift at
/// tau = first grid time with |pi_t u|_H > level (else the horizon T):
/// derivative hdot before tau, -u_tau / (T - tau) after.
MaterializedShift stop_truncate(const MaterializedShift& u, double level);

/// Index of the truncation time on path i (K when the level is never crossed).
std::size_t truncation_step(const MaterializedShift& u, std::size_t i, double level);

struct ProjectionReport {
  /// E<m, h0>_H with its standard error.
  MeanStderr orthogonality;
  /// E|h0 at the horizon|^2.
  double endpoint_defect = 0.0;
  /// E|u|_H^2, the scale the defects are measured against.
  double norm_scale = 0.0;
  /// Columns retained in the regression at each step.
  std::vector<std::size_t> retained_columns;
};

struct Projection {
  MaterializedShift m;
  MaterializedShift h0;
  ProjectionReport report;
};

/// Least-squares Monte Carlo version of the decomposition u = m + h0 with
/// mdot a martingale and h0 endpoint-zero. E[u_T | F_t] is regressed on the
/// feature map augmented with hdot_t; collinear columns are dropped per step.
Projection martingale_projection(const PathEnsemble& ensemble, const MaterializedShift& u,
                                 const FeatureMap& features);

namespace shifts {
/// hdot = c (deterministic constant).
AdaptedShift constant(Vec c);
/// hdot_t = W_t.
AdaptedShift state(std::size_t dim);
/// hdot_t = c on [0, 1/2), -c on [1/2, 1).
AdaptedShift square_wave(Vec c);
/// hdot_t = c cos(2 pi k t) (endpoint-zero, deterministic).
AdaptedShift cosine(Vec c, int k);
/// hdot_t = sin(W_t) coordinatewise times cos(2 pi t).
AdaptedShift sine_state(std::size_t dim);
}  // namespace shifts

}  // namespace varlab
