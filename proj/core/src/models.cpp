#include "varlab/model.hpp"

#include <cmath>

namespace varlab::models {

SemimartingaleModel brownian(std::size_t dim, Vec start) {
  SemimartingaleModel m;
  m.name = "brownian";
  m.dim = dim;
  m.initial = [start](PathRng&) { return start; };
  m.drift = [dim](const PathPrefix&) { return zero_vec(dim); };
  m.diffusion_factor = [dim](const PathPrefix&) { return identity_mat(dim); };
  m.constant_diffusion = true;
  return m;
}

SemimartingaleModel constant_drift(Vec drift, Vec start, double sigma) {
  SemimartingaleModel m;
  m.name = "constant_drift";
  m.dim = static_cast<std::size_t>(drift.size());
  const std::size_t d = m.dim;
  m.initial = [start](PathRng&) { return start; };
  m.drift = [drift](const PathPrefix&) { return drift; };
  m.diffusion_factor = [d, sigma](const PathPrefix&) { return Mat(sigma * identity_mat(d)); };
  m.constant_diffusion = true;
  return m;
}

SemimartingaleModel brownian_with_drift_t(std::size_t dim) {
  SemimartingaleModel m = brownian(dim, zero_vec(dim));
  m.name = "brownian_with_drift_t";
  m.drift = [dim](const PathPrefix& p) {
    Vec v = zero_vec(dim);
    v(0) = p.time();
    return v;
  };
  return m;
}

SemimartingaleModel pinned_brownian(Vec x, Vec y) {
  const auto dim = static_cast<std::size_t>(x.size());
  SemimartingaleModel m = brownian(dim, x);
  m.name = "pinned_brownian";
  m.drift = [y](const PathPrefix& p) {
    Vec v = (y - p.current()) / (1.0 - p.time());
    return v;
  };
  m.singular_at_end = true;
  m.terminal = y;
  return m;
}

SemimartingaleModel entropic_density_sde(double a) {
  if (!(a >= 0.0 && a < 1.0)) throw PreconditionError("entropic density: a must lie in [0, 1)");
  SemimartingaleModel m = brownian(1, zero_vec(1));
  m.name = "entropic_density";
  m.drift = [a](const PathPrefix& p) {
    Vec v = zero_vec(1);
    const double t = p.time();
    if (t < a) return v;
    const double y = p.current()(0) - p.at(p.grid().index_of(a))(0);
    v(0) = 2.0 * y / (1.0 - t + y * y);
    return v;
  };
  return m;
}

PathFunctional entropic_density(double a, const TimeGrid& grid) {
  const std::size_t ja = grid.index_of(a);
  return [a, ja](const PathPrefix& p) {
    if (p.step() != p.grid().steps()) {
      throw PreconditionError("entropic density needs paths reaching t = 1");
    }
    const double y = p.current()(0) - p.at(ja)(0);
    return y * y / (1.0 - a);
  };
}

}  // namespace varlab::models
