#pragma once

#include "varlab/common.hpp"
#include "varlab/ensemble.hpp"
#include "varlab/rng.hpp"

#include <functional>
#include <optional>
#include <string>

namespace varlab {

using InitialSampler = std::function<Vec(PathRng&)>;
using PrefixVectorFn = std::function<Vec(const PathPrefix&)>;
using PrefixMatrixFn = std::function<Mat(const PathPrefix&)>;
/// Scalar functional of a whole simulated path (densities, terminal payoffs).
using PathFunctional = std::function<double(const PathPrefix&)>;

/// A law on path space given by an initial sampler and adapted coefficients.
/// The coefficients receive the path prefix up to the current step only.
struct SemimartingaleModel {
  std::string name;
  std::size_t dim = 1;
  InitialSampler initial;
  PrefixVectorFn drift;
  PrefixMatrixFn diffusion_factor;
  /// The diffusion factor does not depend on (t, path); stored once.
  bool constant_diffusion = false;
  /// Drift blows up at t = 1; simulation stops one step early by default.
  bool singular_at_end = false;
  /// Known terminal value W_1 (pinned laws), used when paths stop before 1.
  std::optional<Vec> terminal;
};

struct SimulationOptions {
  /// Number of steps K to simulate; defaults to M, or M - 1 for singular laws.
  std::optional<std::size_t> steps;
};

/// Euler-Maruyama simulation. Path i draws its increments from the Philox
/// stream keyed by (seed, i), so results do not depend on the thread count.
PathEnsemble simulate(const SemimartingaleModel& model, const TimeGrid& grid,
                      std::size_t n_paths, std::uint64_t seed,
                      SimulationOptions options = {});

/// Represents a law absolutely continuous w.r.t. the base ensemble's law: the
/// states are the base paths, the weights are the density evaluated on the
/// full path (renormalized to mean one), and the recorded drift is the target
/// model's drift evaluated along the base paths.
PathEnsemble reweight(const PathEnsemble& base, const PathFunctional& density,
                      const SemimartingaleModel& target);

/// Result of an adaptedness probe on one function.
struct AdaptednessReport {
  bool adapted = true;
  std::size_t first_violation_step = 0;
  std::string detail;
};

/// Evaluates f on pairs of paths that agree up to step j and differ after it;
/// the values must coincide (and f must not read beyond j).
AdaptednessReport probe_adaptedness(const PrefixVectorFn& f, std::size_t dim,
                                    const TimeGrid& grid, std::uint64_t seed,
                                    std::size_t trials = 8);

// Registry of laws used throughout the laboratory.
namespace models {

SemimartingaleModel brownian(std::size_t dim, Vec start);
SemimartingaleModel constant_drift(Vec drift, Vec start, double sigma);
/// v_t = t e_1 plus unit noise (not a martingale drift).
SemimartingaleModel brownian_with_drift_t(std::size_t dim);
/// Pinned Brownian motion from x to y: v_t = (y - W_t) / (1 - t).
SemimartingaleModel pinned_brownian(Vec x, Vec y);
/// d = 1 law with density (W_1 - W_a)^2 / (1 - a) w.r.t. Wiener measure.
/// Drift 2 (W_t - W_a) / (1 - t + (W_t - W_a)^2) on [a, 1].
SemimartingaleModel entropic_density_sde(double a);
/// Density (W_1 - W_a)^2 / (1 - a) as a path functional (full paths only).
PathFunctional entropic_density(double a, const TimeGrid& grid);

}  // namespace models

}  // namespace varlab
