#pragma once

#include "varlab/characteristics.hpp"
#include "varlab/lagrangian.hpp"
#include "varlab/martingale_test.hpp"
#include "varlab/shifts.hpp"

#include <optional>
#include <vector>

namespace varlab {

/// Martingale test of the Euler-Lagrange process at the probe steps (default
/// probes when empty).
MartingaleReport el_certify(const PathEnsemble& ensemble, const Lagrangian& L,
                            std::span<const std::size_t> probes = {},
                            const MartingaleTestOptions& options = {});

struct VariationalDerivative {
  /// Central difference of the action along eps -> push_shift(., eps).
  double fd = 0.0;
  double fd_std_error = 0.0;
  double epsilon = 0.0;
  /// E <xi, h>_H with xi-dot = grad_v L - int grad_x L.
  double formula = 0.0;
  double formula_std_error = 0.0;
  /// 4 sqrt(se_fd^2 + se_formula^2) + discretization allowance.
  double tolerance = 0.0;
  bool agree = false;
};

/// Requires an endpoint-zero shift bound to the ensemble. Each epsilon reuses
/// the same paths (common random numbers); the reported fd is taken at the
/// first epsilon (in decreasing order) whose value agrees with the previous
/// one to within a tenth of its standard error, else at the smallest.
VariationalDerivative variational_derivative(const PathEnsemble& ensemble, const Lagrangian& L,
                                             const MaterializedShift& shift,
                                             std::vector<double> eps_list = {1e-1, 1e-2, 1e-3},
                                             std::optional<double> allowance = std::nullopt);

struct AveragedElRow {
  double t_start = 0.0;
  double t_end = 0.0;
  std::size_t coordinate = 0;
  /// (E p_b - E p_a) / (t_b - t_a) - E (mean of grad_x L over [a, b)).
  double discrepancy = 0.0;
  double std_error = 0.0;
  double z = 0.0;
};

struct AveragedElReport {
  std::vector<AveragedElRow> rows;
  double max_abs_z = 0.0;
  bool passed = true;
};

/// Per-interval check of d/dt E[grad_v L] = E[grad_x L] between consecutive
/// steps (default probes when empty).
AveragedElReport averaged_el(const PathEnsemble& ensemble, const Lagrangian& L,
                             std::span<const std::size_t> steps = {}, double threshold = 4.0);

struct DriftRepresentationRow {
  std::size_t step = 0;
  double time = 0.0;
  double max_z = 0.0;
};

struct DriftRepresentationReport {
  std::vector<DriftRepresentationRow> rows;
  double max_z = 0.0;
  bool passed = true;
};

/// Regresses xi^V_t - v_t on prefix features, where
/// xi^V_t = (w_1 - w_t)/(1-t) + int_t^1 (1-s)/(1-t) grad V(w_s) ds. The value
/// w_1 is the simulated endpoint when the ensemble reaches t = 1, otherwise
/// `terminal` (pinned laws). A nonzero potential needs the full path.
DriftRepresentationReport drift_representation_check(
    const PathEnsemble& ensemble, const Potential& V, const FeatureMap& features,
    std::span<const std::size_t> probes, std::optional<Vec> terminal = std::nullopt,
    double threshold = 4.0);

}  // namespace varlab
