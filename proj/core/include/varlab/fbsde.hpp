#pragma once

#include "varlab/lagrangian.hpp"
#include "varlab/model.hpp"

#include <vector>

namespace varlab {

/// dX = sigma dB + Y dt, dY = dZ - grad V(t, X) dt.
struct FbsdeSpec {
  enum class Variant { kAdapted, kFiltering };
  enum class Noise {
    kConstant,     // Z constant: Y has finite variation
    kDriving,      // Z = z_scale B (the noise driving X; keeps Y adapted)
    kIndependent,  // Z = z_scale B' with B' independent of B (filtering only)
  };

  std::size_t dim = 1;
  Potential V;
  Mat sigma;
  InitialSampler initial_x;
  Variant variant = Variant::kAdapted;
  Noise noise = Noise::kConstant;
  double z_scale = 0.0;
  /// Adapted variant: Y_0 = g(X_0).
  std::function<Vec(const Vec&)> y0_rule;
  /// Filtering variant (d = 1): Y_0 ~ Normal(y0_mean, y0_var) independent of X_0.
  double y0_mean = 0.0;
  double y0_var = 1.0;
};

struct FbsdeResult {
  /// X paths; drift records are Y (adapted) or E[Y_t | X up to t] (filtering).
  PathEnsemble x;
  /// Y[i][j][c] for j = 0..K.
  std::vector<double> y;
  /// Filtering variant: prior posterior variance Var(Y_j | X_0..X_j), j < K.
  std::vector<double> posterior_var;

  double y_at(std::size_t i, std::size_t j, std::size_t c) const {
    return y[(i * (x.steps() + 1) + j) * x.dim() + c];
  }
};

/// Coupled Euler scheme. The filtering variant runs the exact discrete
/// Kalman recursion and is restricted to d = 1 and quadratic (or zero) V.
FbsdeResult fbsde_simulate(const FbsdeSpec& spec, const TimeGrid& grid, std::size_t n_paths,
                           std::uint64_t seed);

/// Posterior variance recursion of the filtering variant (independent of the
/// data): P+ = P sigma^2 / (P dt + sigma^2), P_{j+1} = P+ + z_scale^2 dt.
std::vector<double> riccati_variance(double p0, double sigma, double z_scale,
                                     const TimeGrid& grid, std::size_t steps);

namespace fbsde {
/// Harmonic oscillator: V = |x|^2 / 2, X_0 = x0, Y_0 = 0, Z constant, sigma = I.
FbsdeSpec oscillator(Vec x0, Potential V = potentials::quadratic());
/// d = 1 filtering example: V = |x|^2/2, Y_0 ~ N(0, 1) hidden, Z constant.
FbsdeSpec filtering_oscillator();
}  // namespace fbsde

}  // namespace varlab
