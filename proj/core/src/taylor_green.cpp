#include "varlab/taylor_green.hpp"

#include <cmath>
#include <numbers>

namespace varlab::taylor_green {

Vec velocity(double t, const Vec& x) {
  Vec u(2);
  const double decay = std::exp(-t);
  u << std::sin(x(0)) * std::cos(x(1)) * decay, -std::cos(x(0)) * std::sin(x(1)) * decay;
  return u;
}

Vec velocity_dt(double t, const Vec& x) { return Vec(-velocity(t, x)); }

Mat velocity_grad(double t, const Vec& x) {
  const double decay = std::exp(-t);
  const double sx = std::sin(x(0)), cx = std::cos(x(0));
  const double sy = std::sin(x(1)), cy = std::cos(x(1));
  Mat g(2, 2);
  g << cx * cy * decay, -sx * sy * decay, sx * sy * decay, -cx * cy * decay;
  return g;
}

Vec velocity_laplacian(double t, const Vec& x) { return Vec(-2.0 * velocity(t, x)); }

double pressure(double t, const Vec& x) {
  return 0.25 * (std::cos(2.0 * x(0)) + std::cos(2.0 * x(1))) * std::exp(-2.0 * t);
}

Vec pressure_grad(double t, const Vec& x) {
  Vec g(2);
  const double decay = std::exp(-2.0 * t);
  g << -0.5 * std::sin(2.0 * x(0)) * decay, -0.5 * std::sin(2.0 * x(1)) * decay;
  return g;
}

Vec ns_residual(double t, const Vec& x) {
  return Vec(velocity_dt(t, x) + velocity_grad(t, x) * velocity(t, x) + pressure_grad(t, x) -
             0.5 * velocity_laplacian(t, x));
}

double divergence(double t, const Vec& x) { return velocity_grad(t, x).trace(); }

ValidationResult validate(std::size_t nx, std::size_t ny, std::size_t nt) {
  ValidationResult r;
  const double two_pi = 2.0 * std::numbers::pi;
  Vec x(2);
  for (std::size_t a = 0; a < nx; ++a) {
    for (std::size_t b = 0; b < ny; ++b) {
      for (std::size_t c = 0; c < nt; ++c) {
        x << two_pi * double(a) / double(nx - 1), two_pi * double(b) / double(ny - 1);
        const double t = nt > 1 ? double(c) / double(nt - 1) : 0.0;
        r.max_residual = std::max(r.max_residual, ns_residual(t, x).cwiseAbs().maxCoeff());
        r.max_divergence = std::max(r.max_divergence, std::abs(divergence(t, x)));
      }
    }
  }
  return r;
}

Potential potential() {
  return {"taylor_green_pressure", [](double t, const Vec& x) { return pressure(1.0 - t, x); },
          [](double t, const Vec& x) { return pressure_grad(1.0 - t, x); }};
}

Vec default_start() {
  Vec x(2);
  x << 0.25 * std::numbers::pi, 0.25 * std::numbers::pi;
  return x;
}

SemimartingaleModel model(const Vec& start) {
  SemimartingaleModel m;
  m.name = "taylor_green";
  m.dim = 2;
  m.initial = [start](PathRng&) { return start; };
  m.drift = [](const PathPrefix& p) { return Vec(-velocity(1.0 - p.time(), Vec(p.current()))); };
  m.diffusion_factor = [](const PathPrefix&) { return identity_mat(2); };
  m.constant_diffusion = true;
  return m;
}

Law simulate_law(const TimeGrid& grid, std::size_t n, std::uint64_t seed, const Vec& start) {
  if (start.size() != 2) throw PreconditionError("taylor_green: start must be in R^2");
  return {simulate(model(start), grid, n, seed), potential()};
}

}  // namespace varlab::taylor_green
