#include "varlab/fbsde.hpp"

#include "varlab/parallel.hpp"

#include <cmath>

namespace varlab {

std::vector<double> riccati_variance(double p0, double sigma, double z_scale,
                                     const TimeGrid& grid, std::size_t steps) {
  const double dt = grid.dt();
  const double s2 = sigma * sigma;
  std::vector<double> p(steps);
  double current = p0;
  for (std::size_t j = 0; j < steps; ++j) {
    p[j] = current;
    current = current * s2 / (current * dt + s2) + z_scale * z_scale * dt;
  }
  return p;
}

namespace {

void check_spec(const FbsdeSpec& s) {
  const auto d = static_cast<Eigen::Index>(s.dim);
  if (s.sigma.rows() != d || s.sigma.cols() != d) {
    throw PreconditionError("fbsde: sigma must be d x d");
  }
  if (!s.initial_x || !s.V.grad) throw PreconditionError("fbsde: initial law and grad V required");
  if (s.variant == FbsdeSpec::Variant::kAdapted) {
    if (!s.y0_rule) throw PreconditionError("fbsde: adapted variant needs Y_0 = g(X_0)");
    if (s.noise == FbsdeSpec::Noise::kIndependent) {
      throw UnsupportedError("fbsde: independent noise in Y needs the filtering variant");
    }
  } else {
    if (s.dim != 1) throw UnsupportedError("fbsde: filtering variant is implemented for d = 1");
    if (s.V.name != "quadratic" && s.V.name != "zero") {
      throw UnsupportedError("fbsde: filtering variant needs a quadratic potential");
    }
    if (s.noise == FbsdeSpec::Noise::kDriving) {
      throw UnsupportedError("fbsde: filtering variant supports constant or independent noise");
    }
    if (!(s.y0_var > 0.0) || !(s.sigma(0, 0) != 0.0)) {
      throw PreconditionError("fbsde: filtering variant needs y0_var > 0 and sigma != 0");
    }
  }
}

}  // namespace

FbsdeResult fbsde_simulate(const FbsdeSpec& spec, const TimeGrid& grid, std::size_t n,
                           std::uint64_t seed) {
  check_spec(spec);
  if (n == 0) throw PreconditionError("fbsde: n_paths must be >= 1");
  const std::size_t k = grid.steps();
  const std::size_t d = spec.dim;
  const auto di = static_cast<Eigen::Index>(d);
  const double dt = grid.dt();
  const double sqdt = std::sqrt(dt);
  const bool filtering = spec.variant == FbsdeSpec::Variant::kFiltering;

  FbsdeResult out{PathEnsemble(grid, n, d, k, seed, PathEnsemble::DiffusionStorage::kConstant),
                  std::vector<double>(n * (k + 1) * d, 0.0), {}};
  auto& e = out.x;
  e.diffusion(0, 0) = spec.sigma;
  const double z_noise = spec.noise == FbsdeSpec::Noise::kConstant ? 0.0 : spec.z_scale;
  const double q = filtering ? z_noise : 0.0;
  if (filtering) out.posterior_var = riccati_variance(spec.y0_var, spec.sigma(0, 0), q, grid, k);
  const Mat sigma = spec.sigma;

  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    Vec db(di), dz(di);
    for (std::size_t i = begin; i < end; ++i) {
      PathRng init(seed, i, Stream::kInitial);
      PathRng inc(seed, i, Stream::kIncrements);
      PathRng hidden(seed, i, Stream::kHidden);
      Vec x = spec.initial_x(init);
      Vec y = filtering ? Vec::Constant(1, spec.y0_mean + std::sqrt(spec.y0_var) * hidden.normal())
                        : spec.y0_rule(x);
      double m = spec.y0_mean;  // filtering prior mean
      e.state(i, 0) = x;
      for (std::size_t j = 0; j < k; ++j) {
        const double t = grid.time(j);
        for (Eigen::Index c = 0; c < di; ++c) db(c) = inc.normal() * sqdt;
        if (spec.noise == FbsdeSpec::Noise::kDriving) {
          dz = z_noise * db;
        } else if (spec.noise == FbsdeSpec::Noise::kIndependent) {
          for (Eigen::Index c = 0; c < di; ++c) dz(c) = z_noise * hidden.normal() * sqdt;
        } else {
          dz.setZero();
        }
        for (std::size_t c = 0; c < d; ++c) {
          out.y[(i * (k + 1) + j) * d + c] = y(static_cast<Eigen::Index>(c));
        }
        const Vec grad_v = spec.V.grad(t, x);
        const Vec x_next = x + y * dt + sigma * db;
        if (filtering) {
          e.drift(i, j)(0) = m;
          const double p = out.posterior_var[j];
          const double s2 = sigma(0, 0) * sigma(0, 0);
          const double gain = p * dt / (p * dt * dt + s2 * dt);
          const double innovation = (x_next(0) - x(0)) - m * dt;
          m = m + gain * innovation - grad_v(0) * dt;
        } else {
          e.drift(i, j) = y;
        }
        y = y + dz - grad_v * dt;
        x = x_next;
        if (!x.allFinite() || !y.allFinite()) {
          throw SimulationError("fbsde: non-finite state (path " + std::to_string(i) +
                                ", step " + std::to_string(j) + ")");
        }
        e.state(i, j + 1) = x;
      }
      for (std::size_t c = 0; c < d; ++c) {
        out.y[(i * (k + 1) + k) * d + c] = y(static_cast<Eigen::Index>(c));
      }
    }
  });
  return out;
}

namespace fbsde {

FbsdeSpec oscillator(Vec x0, Potential V) {
  FbsdeSpec s;
  s.dim = static_cast<std::size_t>(x0.size());
  s.V = std::move(V);
  s.sigma = identity_mat(s.dim);
  s.initial_x = [x0](PathRng&) { return x0; };
  const auto d = s.dim;
  s.y0_rule = [d](const Vec&) { return zero_vec(d); };
  return s;
}

FbsdeSpec filtering_oscillator() {
  FbsdeSpec s = oscillator(zero_vec(1));
  s.variant = FbsdeSpec::Variant::kFiltering;
  s.y0_rule = nullptr;
  s.y0_mean = 0.0;
  s.y0_var = 1.0;
  return s;
}

}  // namespace fbsde
}  // namespace varlab
