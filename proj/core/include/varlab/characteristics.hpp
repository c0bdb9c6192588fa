#pragma once

#include "varlab/ensemble.hpp"
#include "varlab/regression.hpp"

#include <functional>
#include <string>
#include <vector>

namespace varlab {

/// Finite feature vector of a path prefix, used as regressors.
struct FeatureMap {
  std::vector<std::string> names;
  std::function<void(const PathPrefix&, std::span<double>)> evaluate;

  std::size_t size() const { return names.size(); }
};

namespace features {
FeatureMap constant();
/// {1, x_1..x_d} of the current state.
FeatureMap affine(std::size_t dim);
/// {1, x, x^2 (coordinatewise)} of the current state, optionally with
/// {x_0, x_0^2} of the initial state.
FeatureMap quadratic(std::size_t dim, bool with_initial);
/// Design matrix of a feature map over all paths at one step.
Eigen::MatrixXd design(const PathEnsemble& ensemble, const FeatureMap& map, std::size_t step);
}  // namespace features

struct CharacteristicsEstimate {
  std::size_t step = 0;
  double time = 0.0;
  RegressionResult drift;  // columns: coordinates of v
  RegressionResult alpha;  // columns: upper-triangular entries (a, b), a <= b
};

/// Regresses dW/dt and dW dW^T/dt at each probe step on the features of the
/// prefix. Requires at least 1000 paths.
std::vector<CharacteristicsEstimate> estimate_characteristics(
    const PathEnsemble& ensemble, const FeatureMap& map, std::span<const std::size_t> steps);

/// Recorded-versus-empirical consistency at one probe: regression of
/// (dW/dt - v_rec) and ((dW - v_rec dt)(dW - v_rec dt)^T/dt - alpha_rec) on the
/// features; all coefficients should vanish.
struct CharacteristicsCheck {
  std::size_t step = 0;
  double max_drift_z = 0.0;
  double max_alpha_z = 0.0;
};

std::vector<CharacteristicsCheck> check_recorded_characteristics(
    const PathEnsemble& ensemble, const FeatureMap& map, std::span<const std::size_t> steps);

}  // namespace varlab
