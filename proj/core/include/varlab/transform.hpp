#pragma once

#include "varlab/martingale_test.hpp"
#include "varlab/shifts.hpp"

#include <string>
#include <vector>

namespace varlab {

/// Space-time map h(t, x) on R^d with inverse and derivatives.
/// grad(t, x)(k, i) = dh_k/dx_i; hess(t, x)[k](i, j) = d2 h_k / dx_i dx_j.
struct SpaceTimeMap {
  std::string name;
  std::size_t dim = 1;
  std::function<Vec(double, const Vec&)> h;
  std::function<Vec(double, const Vec&)> inverse;
  std::function<Vec(double, const Vec&)> dt_h;
  std::function<Mat(double, const Vec&)> grad;
  std::function<std::vector<Mat>(double, const Vec&)> hess;
  /// grad does not depend on (t, x) and hess vanishes.
  bool affine = false;
};

/// Pushforward by W + eps h: states + eps h, drifts + eps hdot, same diffusion.
PathEnsemble push_shift(const PathEnsemble& ensemble, const MaterializedShift& shift,
                        double epsilon);

/// Pushforward by the lift of a space-time map. Drift and diffusion factor
/// follow Ito's formula: v' = dt_h + grad_h v + 1/2 sum_ij alpha_ij d2_ij h,
/// sigma' = grad_h sigma.
PathEnsemble lift(const PathEnsemble& ensemble, const SpaceTimeMap& map);

/// Drift given by the Ito formula at one point (exposed for oracles).
Vec ito_drift(const SpaceTimeMap& map, double t, const Vec& x, const Vec& v, const Mat& alpha);

/// Largest |inverse(t, h(t, x)) - x| over the points.
double inverse_defect(const SpaceTimeMap& map, const std::vector<std::pair<double, Vec>>& points);

/// Generator residual of u along the ensemble at probe steps, and the
/// martingale test applied to u(t, W_t).
struct HarmonicReport {
  double max_abs_residual = 0.0;
  double mean_abs_residual = 0.0;
  /// max_abs_residual <= residual_tolerance.
  bool residual_zero = true;
  MartingaleReport martingale;
  /// Both verdicts say "martingale" or both say "not a martingale".
  bool agree = true;
};

HarmonicReport harmonic_check(const PathEnsemble& ensemble, const SpaceTimeMap& u,
                              std::span<const std::size_t> probes,
                              const MartingaleTestOptions& options = {},
                              double residual_tolerance = 1e-9);

namespace maps {
SpaceTimeMap identity(std::size_t dim);
/// x -> A x + b.
SpaceTimeMap affine(Mat a, Vec b);
/// x -> x + amplitude sin(x) coordinatewise (|amplitude| < 1).
SpaceTimeMap sine_warp(std::size_t dim, double amplitude);
/// x -> x * exp(rate t) (time-dependent scaling).
SpaceTimeMap time_scaling(std::size_t dim, double rate);
/// u(t, x) = x^2 - t (space-time harmonic for Brownian motion, d = 1).
SpaceTimeMap heat_square();
/// u(t, x) = x^2 (not harmonic, d = 1).
SpaceTimeMap square();
}  // namespace maps

}  // namespace varlab
