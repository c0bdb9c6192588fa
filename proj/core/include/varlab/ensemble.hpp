#pragma once

#include "varlab/common.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace varlab {

/// Uniform grid t_j = j / M on [0, 1].
class TimeGrid {
 public:
  explicit TimeGrid(std::size_t steps);

  std::size_t steps() const { return steps_; }
  double dt() const { return 1.0 / static_cast<double>(steps_); }
  double time(std::size_t j) const {
    return static_cast<double>(j) / static_cast<double>(steps_);
  }
  /// Grid index nearest to t (t clamped to [0, 1]).
  std::size_t index_of(double t) const;

  bool operator==(const TimeGrid&) const = default;

 private:
  std::size_t steps_;
};

/// Read-only view of one path restricted to indices 0..step. Accessing an
/// index beyond the current step throws, which is what the adaptedness probes
/// rely on.
class PathPrefix {
 public:
  PathPrefix(std::span<const double> path, std::size_t dim, std::size_t step,
             const TimeGrid& grid)
      : path_(path), dim_(dim), step_(step), grid_(&grid) {}

  std::size_t dim() const { return dim_; }
  std::size_t step() const { return step_; }
  double time() const { return grid_->time(step_); }
  const TimeGrid& grid() const { return *grid_; }

  Eigen::Map<const Eigen::VectorXd> at(std::size_t k) const;
  Eigen::Map<const Eigen::VectorXd> current() const { return at(step_); }

 private:
  std::span<const double> path_;
  std::size_t dim_;
  std::size_t step_;
  const TimeGrid* grid_;
};

/// N sampled paths on a uniform grid together with the coefficient
/// evaluations (drift v_j, diffusion factor sigma_j) used at each step.
///
/// Paths cover steps 0..K with K <= M (K < M for laws whose drift is singular
/// at t = 1). Diffusion factors are stored per step, or once when the law has
/// a constant factor. Ensembles are immutable once built and safe to share.
class PathEnsemble {
 public:
  enum class DiffusionStorage { kPerStep, kConstant };

  PathEnsemble(TimeGrid grid, std::size_t n_paths, std::size_t dim, std::size_t steps,
               std::uint64_t seed, DiffusionStorage storage);

  const TimeGrid& grid() const { return grid_; }
  std::size_t n_paths() const { return n_paths_; }
  std::size_t dim() const { return dim_; }
  /// Number of simulated steps K; states exist for 0..K, drifts for 0..K-1.
  std::size_t steps() const { return steps_; }
  double horizon() const { return grid_.time(steps_); }
  std::uint64_t seed() const { return seed_; }
  /// Process-unique identity; shifts and processes bind to it.
  std::uint64_t id() const { return id_; }
  DiffusionStorage diffusion_storage() const { return storage_; }

  Eigen::Map<const Eigen::VectorXd> state(std::size_t i, std::size_t j) const;
  Eigen::Map<Eigen::VectorXd> state(std::size_t i, std::size_t j);
  Eigen::Map<const Eigen::VectorXd> drift(std::size_t i, std::size_t j) const;
  Eigen::Map<Eigen::VectorXd> drift(std::size_t i, std::size_t j);
  /// Row-major d x d factor sigma at (i, j).
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
  diffusion(std::size_t i, std::size_t j) const;
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
  diffusion(std::size_t i, std::size_t j);
  /// alpha = sigma sigma^T at (i, j).
  Mat alpha(std::size_t i, std::size_t j) const;

  PathPrefix prefix(std::size_t i, std::size_t j) const;
  std::span<const double> path(std::size_t i) const;

  const std::optional<std::vector<double>>& weights() const { return weights_; }
  double weight(std::size_t i) const { return weights_ ? (*weights_)[i] : 1.0; }
  /// Installs weights rescaled to mean one. Throws on negative / non-finite
  /// entries or a zero total.
  void set_weights(std::vector<double> raw);

  std::vector<double>& states_data() { return states_; }
  const std::vector<double>& states_data() const { return states_; }
  std::vector<double>& drifts_data() { return drifts_; }
  const std::vector<double>& drifts_data() const { return drifts_; }
  std::vector<double>& diffusions_data() { return diffusions_; }
  const std::vector<double>& diffusions_data() const { return diffusions_; }

  /// Copy with a fresh identity (used by transformations producing new laws).
  PathEnsemble clone() const;

 private:
  std::size_t diffusion_offset(std::size_t i, std::size_t j) const;

  TimeGrid grid_;
  std::size_t n_paths_;
  std::size_t dim_;
  std::size_t steps_;
  std::uint64_t seed_;
  std::uint64_t id_;
  DiffusionStorage storage_;
  std::vector<double> states_;
  std::vector<double> drifts_;
  std::vector<double> diffusions_;
  std::optional<std::vector<double>> weights_;
};

/// Per-path samples of a vector process at a list of grid steps:
/// values[(i * probes + p) * dim + c].
struct ProcessSamples {
  std::uint64_t ensemble_id = 0;
  std::size_t n_paths = 0;
  std::size_t dim = 0;
  std::vector<std::size_t> steps;
  std::vector<double> values;

  ProcessSamples() = default;
  ProcessSamples(std::uint64_t id, std::size_t n, std::size_t d, std::vector<std::size_t> s)
      : ensemble_id(id), n_paths(n), dim(d), steps(std::move(s)),
        values(n * steps.size() * d, 0.0) {}

  double& at(std::size_t i, std::size_t p, std::size_t c) {
    return values[(i * steps.size() + p) * dim + c];
  }
  double at(std::size_t i, std::size_t p, std::size_t c) const {
    return values[(i * steps.size() + p) * dim + c];
  }
};

/// Steps K * f for each fraction f, rounded to the nearest index and clamped
/// to [0, K - 1] (the last index carrying a drift record).
std::vector<std::size_t> probe_steps(const PathEnsemble& ensemble,
                                     std::span<const double> fractions);
/// Default probe fractions {0.1, 0.25, 0.5, 0.75, 0.9} of the horizon.
std::vector<std::size_t> default_probe_steps(const PathEnsemble& ensemble);

}  // namespace varlab
