#pragma once

#include "varlab/lagrangian.hpp"
#include "varlab/model.hpp"

namespace varlab::taylor_green {

/// Decaying Taylor-Green vortex solving du/dt + (u . grad) u = -grad p + lap u / 2
/// on the plane: u = (sin x cos y, -cos x sin y) e^{-t},
/// p = (cos 2x + cos 2y) e^{-2t} / 4.
Vec velocity(double t, const Vec& x);
Vec velocity_dt(double t, const Vec& x);
/// (k, i) entry: d u_k / d x_i.
Mat velocity_grad(double t, const Vec& x);
Vec velocity_laplacian(double t, const Vec& x);
double pressure(double t, const Vec& x);
Vec pressure_grad(double t, const Vec& x);

/// du/dt + (grad u) u + grad p - lap u / 2.
Vec ns_residual(double t, const Vec& x);
double divergence(double t, const Vec& x);

struct ValidationResult {
  double max_residual = 0.0;
  double max_divergence = 0.0;
};

/// Pointwise maxima over an nx x ny x nt grid on [0, 2 pi]^2 x [0, 1].
ValidationResult validate(std::size_t nx = 50, std::size_t ny = 50, std::size_t nt = 10);

/// V(t, x) = p(1 - t, x).
Potential potential();

/// Default start (pi/4, pi/4), where grad p is largest along the diagonal.
Vec default_start();

/// dX = dB - u(1 - t, X) dt from a fixed start.
SemimartingaleModel model(const Vec& start = default_start());

struct Law {
  PathEnsemble ensemble;
  Potential V;
};

Law simulate_law(const TimeGrid& grid, std::size_t n_paths, std::uint64_t seed,
                 const Vec& start = default_start());

}  // namespace varlab::taylor_green
