#pragma once

#include "varlab/lagrangian.hpp"
#include "varlab/martingale_test.hpp"

#include <string>

namespace varlab {

/// One-parameter family of space-time maps h^eps with h^0 = identity,
/// described by its generator u(t, x) = d/deps h^eps |_0 and the spatial
/// Jacobian of the generator (rows: output coordinates).
struct NoetherFamily {
  std::string name;
  std::size_t dim = 1;
  std::function<Vec(double, double, const Vec&)> map;  // (eps, t, x)
  std::function<Vec(double, const Vec&)> generator;
  std::function<Mat(double, const Vec&)> generator_grad;
};

namespace families {
/// h^eps(x) = x + eps e_k.
NoetherFamily translation(std::size_t dim, std::size_t k);
/// h^eps(x) = R_eps x in the plane, generator J x with J = [[0, -1], [1, 0]].
NoetherFamily rotation();
}  // namespace families

struct NoetherResult {
  /// I_t at the probe steps (dimension 1).
  ProcessSamples invariant;
  MartingaleReport martingale;
};

/// I_j = <u(t_j, W_j), p_j> - sum_c [u^c(W), p^c]_j + sum_{i<j} theta_i dt with
/// p = grad_v L, realized covariation sum_{i<j} du_i dp_i on the grid, and
/// theta = sum_ab kappa_ab dL/dalpha_ab, kappa = alpha grad_u^T + grad_u alpha.
/// Requires L.grad_a.
NoetherResult noether_invariant(const PathEnsemble& ensemble, const Lagrangian& L,
                                const NoetherFamily& family,
                                std::span<const std::size_t> probes = {},
                                const MartingaleTestOptions& options = {});

}  // namespace varlab
