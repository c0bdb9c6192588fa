#pragma once

#include "varlab/ensemble.hpp"
#include "varlab/parallel.hpp"

#include <functional>
#include <string>
#include <vector>

namespace varlab {

/// Scalar potential V(t, x) with its spatial gradient.
struct Potential {
  std::string name;
  std::function<double(double, const Vec&)> value;
  std::function<Vec(double, const Vec&)> grad;
};

/// L_t(x, v, a) with its partial gradients. grad_a may be empty for
/// Lagrangians that do not depend on a. Evaluators must be stateless.
struct Lagrangian {
  using Scalar = std::function<double(double, const Vec&, const Vec&, const Mat&)>;
  using Vector = std::function<Vec(double, const Vec&, const Vec&, const Mat&)>;
  using Matrix = std::function<Mat(double, const Vec&, const Vec&, const Mat&)>;

  std::string name;
  Scalar eval;
  Vector grad_x;
  Vector grad_v;
  Matrix grad_a;
};

/// a L1 + b L2 (grad_a present only when both have one or the coefficient of
/// the missing one is zero).
Lagrangian linear_combination(double a, const Lagrangian& l1, double b, const Lagrangian& l2);

namespace potentials {
Potential zero();
/// V = k |x|^2 / 2.
Potential quadratic(double k = 1.0);
/// V = c x_1^2 (not rotation invariant for d >= 2).
Potential coordinate_square(double c = 1.0);
}  // namespace potentials

namespace lagrangians {
/// |v|^2 / 2.
Lagrangian kinetic();
/// |v|^2 / 2 - V(t, x).
Lagrangian with_potential(const Potential& V);
/// trace(a) |v|^2 (depends on a).
Lagrangian trace_weighted();
/// |v|^2 / 2 - V(t, x) + c trace(a): a-dependent, same Euler-Lagrange process as
/// with_potential.
Lagrangian with_potential_and_trace(const Potential& V, double c);
}  // namespace lagrangians

struct ActionEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n_paths = 0;
  std::size_t grid_steps = 0;
};

/// Number of left-rectangle terms t_j < horizon available in the ensemble.
std::size_t action_steps(const PathEnsemble& ensemble, double horizon);

/// Per-path sum_{t_j < horizon} L(t_j, W_j, v_j, alpha_j) dt.
std::vector<double> path_actions(const PathEnsemble& ensemble, const Lagrangian& L,
                                 double horizon = 1.0);
/// Weighted Monte Carlo mean of path_actions with its standard error.
ActionEstimate action(const PathEnsemble& ensemble, const Lagrangian& L, double horizon = 1.0);

struct GradPoint {
  double t = 0.0;
  Vec x, v;
  Mat a;
};

/// Random points in [0,1] x [-box, box]^d x [-box, box]^d x {S S^T}, S with
/// entries in [-box, box].
std::vector<GradPoint> sample_grad_points(std::size_t dim, double box, std::size_t count,
                                          std::uint64_t seed);

struct GradCheckReport {
  double max_error_x = 0.0;
  double max_error_v = 0.0;
  double max_error_a = 0.0;
  double worst() const;
};

/// Compares each analytic partial derivative with central differences of
/// eval. The error of one component is |fd - g| / max(1, |g|) at the step in
/// eps_list (decreasing) where it is smallest.
GradCheckReport grad_check(const Lagrangian& L, const std::vector<GradPoint>& points,
                           const std::vector<double>& eps_list);

/// N_j = grad_v L(t_j, ...) - sum_{i<j} grad_x L(t_i, ...) dt at the given
/// steps (each < K).
ProcessSamples el_process(const PathEnsemble& ensemble, const Lagrangian& L,
                          std::span<const std::size_t> steps);
/// el_process at every step 0..K-1.
ProcessSamples el_process(const PathEnsemble& ensemble, const Lagrangian& L);

}  // namespace varlab
