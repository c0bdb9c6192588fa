#pragma once

#include "varlab/model.hpp"

#include <atomic>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <vector>

namespace varlab {

/// Uniform 1-d lattice of cell centers x_i = x_min + i (x_max - x_min)/(n - 1).
struct Lattice {
  double x_min = -6.0;
  double x_max = 6.0;
  std::size_t cells = 481;

  double spacing() const { return (x_max - x_min) / static_cast<double>(cells - 1); }
  double center(std::size_t i) const { return x_min + static_cast<double>(i) * spacing(); }
  /// Nearest cell to x (clamped).
  std::size_t nearest(double x) const;
};

/// Endpoint marginals of a Schroedinger bridge problem with unit Brownian
/// reference. Masses must be nonnegative and sum to one within 1e-12.
struct BridgeProblem {
  Lattice lattice;
  std::vector<double> nu0;
  std::vector<double> nu1;
};

namespace marginals {
std::vector<double> point_mass(const Lattice& lattice, double x);
/// Cell probabilities of Normal(mean, variance), renormalized on the lattice.
std::vector<double> gaussian(const Lattice& lattice, double mean, double variance);
/// Two-column CSV (cell center, mass); centers must sit on the lattice.
std::vector<double> read_csv(const Lattice& lattice, const std::filesystem::path& file);
}  // namespace marginals

struct SinkhornOptions {
  double tol = 1e-9;
  std::size_t max_iter = 10000;
};

/// One step of the lattice heat semigroup over time dt: cell probabilities of
/// Normal(x_i, dt - spacing^2/12) (the variance lost to cell rounding is put
/// back), rows normalized.
Eigen::MatrixXd lattice_heat_step(const Lattice& lattice, double dt);

struct BridgeSolution {
  Lattice lattice;
  TimeGrid grid{1};
  std::vector<double> nu0;
  std::vector<double> nu1;
  /// log of the multiplicative potentials: coupling
  /// pi_ij = nu0_i phi0_i K_ij phi1_j with K the time-one lattice kernel.
  std::vector<double> log_phi0;
  std::vector<double> log_phi1;
  /// log h(t_j, x_i), row-major (M + 1) x cells; h(1) = phi1 and
  /// h(t_j) = P h(t_{j+1}) with P the one-step kernel.
  std::vector<double> log_h;
  /// v(t_j, x_i) = d/dx log h(t_j, x_i) by central differences, M x cells.
  std::vector<double> drift;
  /// KL of the endpoint coupling w.r.t. nu0 (x) K, i.e. the relative entropy of
  /// the bridge w.r.t. the reference started from nu0.
  double entropy = 0.0;
  std::size_t iterations = 0;
  /// Total-variation error of the nu0 marginal after each iteration.
  std::vector<double> marginal_errors;
  /// max_j max_i |h(t_j) - P h(t_{j+1})| / h(t_j).
  double harmonic_defect = 0.0;

  double drift_at(std::size_t j, std::size_t i) const { return drift[j * lattice.cells + i]; }
  double log_h_at(std::size_t j, std::size_t i) const { return log_h[j * lattice.cells + i]; }
};

/// Iterative proportional fitting in the log domain on the time-one kernel,
/// then backward propagation of h on the time grid.
/// Throws ConvergenceError after max_iter iterations and ConvergenceError on
/// kernel underflow (lattice too wide for a positive time-one kernel).
BridgeSolution sinkhorn_bridge(const BridgeProblem& problem, const TimeGrid& grid,
                               const SinkhornOptions& options = {});

/// Bridge drift as a model: v(t_j, x) linearly interpolated between cell
/// centers, unit diffusion, X_0 drawn from nu0 (cell centers). Queries outside
/// the lattice are clamped and counted.
struct BridgeModel {
  SemimartingaleModel model;
  std::shared_ptr<std::atomic<std::size_t>> clamped;
};
BridgeModel bridge_to_model(std::shared_ptr<const BridgeSolution> solution);

/// Columns t,x,v for every grid time and cell.
void write_drift_csv(const BridgeSolution& solution, std::ostream& os);
void write_drift_csv(const BridgeSolution& solution, const std::filesystem::path& file);

/// Total variation between the empirical law of the terminal states and nu1
/// after aggregating lattice cells into bins of `cells_per_bin`.
double terminal_tv(const PathEnsemble& ensemble, const BridgeSolution& solution,
                   std::size_t cells_per_bin);

}  // namespace varlab
