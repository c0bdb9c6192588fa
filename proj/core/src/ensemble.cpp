#include "varlab/ensemble.hpp"

#include "varlab/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>

namespace varlab {
namespace {

std::atomic<std::uint64_t> g_next_id{1};

}  // namespace

TimeGrid::TimeGrid(std::size_t steps) : steps_(steps) {
  if (steps == 0) throw GridError("time grid needs at least one step");
}

std::size_t TimeGrid::index_of(double t) const {
  t = std::clamp(t, 0.0, 1.0);
  return static_cast<std::size_t>(std::llround(t * static_cast<double>(steps_)));
}

Eigen::Map<const Eigen::VectorXd> PathPrefix::at(std::size_t k) const {
  if (k > step_) {
    throw std::out_of_range("path prefix read at step " + std::to_string(k) +
                            " beyond current step " + std::to_string(step_));
  }
  return {path_.data() + k * dim_, static_cast<Eigen::Index>(dim_)};
}

PathEnsemble::PathEnsemble(TimeGrid grid, std::size_t n_paths, std::size_t dim,
                           std::size_t steps, std::uint64_t seed, DiffusionStorage storage)
    : grid_(grid),
      n_paths_(n_paths),
      dim_(dim),
      steps_(steps),
      seed_(seed),
      id_(g_next_id.fetch_add(1)),
      storage_(storage) {
  if (n_paths == 0) throw PreconditionError("ensemble needs at least one path");
  if (dim == 0 || dim > static_cast<std::size_t>(kMaxDim)) {
    throw PreconditionError("state dimension must be in [1, " + std::to_string(kMaxDim) + "]");
  }
  if (steps == 0 || steps > grid.steps()) {
    throw GridError("ensemble steps must be in [1, M]");
  }
  states_.assign(n_paths * (steps + 1) * dim, 0.0);
  drifts_.assign(n_paths * steps * dim, 0.0);
  diffusions_.assign(storage == DiffusionStorage::kConstant ? dim * dim
                                                            : n_paths * steps * dim * dim,
                     0.0);
}

Eigen::Map<const Eigen::VectorXd> PathEnsemble::state(std::size_t i, std::size_t j) const {
  return {states_.data() + (i * (steps_ + 1) + j) * dim_, static_cast<Eigen::Index>(dim_)};
}

Eigen::Map<Eigen::VectorXd> PathEnsemble::state(std::size_t i, std::size_t j) {
  return {states_.data() + (i * (steps_ + 1) + j) * dim_, static_cast<Eigen::Index>(dim_)};
}

Eigen::Map<const Eigen::VectorXd> PathEnsemble::drift(std::size_t i, std::size_t j) const {
  return {drifts_.data() + (i * steps_ + j) * dim_, static_cast<Eigen::Index>(dim_)};
}

Eigen::Map<Eigen::VectorXd> PathEnsemble::drift(std::size_t i, std::size_t j) {
  return {drifts_.data() + (i * steps_ + j) * dim_, static_cast<Eigen::Index>(dim_)};
}

std::size_t PathEnsemble::diffusion_offset(std::size_t i, std::size_t j) const {
  if (storage_ == DiffusionStorage::kConstant) return 0;
  return (i * steps_ + j) * dim_ * dim_;
}

Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
PathEnsemble::diffusion(std::size_t i, std::size_t j) const {
  const auto d = static_cast<Eigen::Index>(dim_);
  return {diffusions_.data() + diffusion_offset(i, j), d, d};
}

Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
PathEnsemble::diffusion(std::size_t i, std::size_t j) {
  const auto d = static_cast<Eigen::Index>(dim_);
  return {diffusions_.data() + diffusion_offset(i, j), d, d};
}

Mat PathEnsemble::alpha(std::size_t i, std::size_t j) const {
  const auto s = diffusion(i, j);
  Mat a = s * s.transpose();
  return a;
}

PathPrefix PathEnsemble::prefix(std::size_t i, std::size_t j) const {
  return PathPrefix(path(i), dim_, j, grid_);
}

std::span<const double> PathEnsemble::path(std::size_t i) const {
  return {states_.data() + i * (steps_ + 1) * dim_, (steps_ + 1) * dim_};
}

void PathEnsemble::set_weights(std::vector<double> raw) {
  if (raw.size() != n_paths_) throw PreconditionError("weights size does not match n_paths");
  double total = 0.0;
  for (double w : raw) {
    if (!std::isfinite(w) || w < 0.0) throw PreconditionError("weights must be finite and >= 0");
  }
  total = compensated_sum(raw);
  if (!(total > 0.0)) throw PreconditionError("weights sum to zero");
  const double scale = static_cast<double>(n_paths_) / total;
  for (double& w : raw) w *= scale;
  weights_ = std::move(raw);
}

PathEnsemble PathEnsemble::clone() const {
  PathEnsemble copy = *this;
  copy.id_ = g_next_id.fetch_add(1);
  return copy;
}

std::vector<std::size_t> probe_steps(const PathEnsemble& ensemble,
                                     std::span<const double> fractions) {
  std::vector<std::size_t> out;
  const double k = static_cast<double>(ensemble.steps());
  for (double f : fractions) {
    auto s = static_cast<std::size_t>(std::llround(std::clamp(f, 0.0, 1.0) * k));
    out.push_back(std::min(s, ensemble.steps() - 1));
  }
  return out;
}

std::vector<std::size_t> default_probe_steps(const PathEnsemble& ensemble) {
  static constexpr double kFractions[] = {0.1, 0.25, 0.5, 0.75, 0.9};
  return probe_steps(ensemble, kFractions);
}

}  // namespace varlab
