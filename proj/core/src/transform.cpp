#include "varlab/transform.hpp"

#include "varlab/parallel.hpp"

#include <cmath>

namespace varlab {

PathEnsemble push_shift(const PathEnsemble& e, const MaterializedShift& shift, double eps) {
  if (shift.bound_to() != e.id()) {
    throw BindingError("push_shift: shift is bound to a different ensemble");
  }
  PathEnsemble out = e.clone();
  parallel_for(e.n_paths(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t j = 0; j <= e.steps(); ++j) out.state(i, j) += eps * shift.h(i, j);
      for (std::size_t j = 0; j < e.steps(); ++j) out.drift(i, j) += eps * shift.hdot(i, j);
    }
  });
  return out;
}

Vec ito_drift(const SpaceTimeMap& map, double t, const Vec& x, const Vec& v, const Mat& alpha) {
  Vec out = map.dt_h(t, x) + map.grad(t, x) * v;
  if (!map.affine) {
    const auto hess = map.hess(t, x);
    for (std::size_t k = 0; k < hess.size(); ++k) {
      out(static_cast<Eigen::Index>(k)) += 0.5 * (alpha.cwiseProduct(hess[k])).sum();
    }
  }
  return out;
}

PathEnsemble lift(const PathEnsemble& e, const SpaceTimeMap& map) {
  if (map.dim != e.dim()) throw PreconditionError("lift: dimension mismatch");
  const bool constant = map.affine &&
                        e.diffusion_storage() == PathEnsemble::DiffusionStorage::kConstant;
  PathEnsemble out(e.grid(), e.n_paths(), e.dim(), e.steps(), e.seed(),
                   constant ? PathEnsemble::DiffusionStorage::kConstant
                            : PathEnsemble::DiffusionStorage::kPerStep);
  if (e.weights()) out.set_weights(*e.weights());
  if (constant) {
    const Vec origin = zero_vec(e.dim());
    out.diffusion(0, 0) = map.grad(0.0, origin) * Mat(e.diffusion(0, 0));
  }
  parallel_for(e.n_paths(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t j = 0; j <= e.steps(); ++j) {
        const double t = e.grid().time(j);
        const Vec x = e.state(i, j);
        const Vec y = map.h(t, x);
        if (!y.allFinite()) {
          throw SimulationError("lift: non-finite map value (path " + std::to_string(i) +
                                ", step " + std::to_string(j) + ")");
        }
        out.state(i, j) = y;
        if (j == e.steps()) break;
        const Vec v = ito_drift(map, t, x, e.drift(i, j), e.alpha(i, j));
        if (!v.allFinite()) {
          throw SimulationError("lift: non-finite drift (path " + std::to_string(i) + ", step " +
                                std::to_string(j) + ")");
        }
        out.drift(i, j) = v;
        if (!constant) out.diffusion(i, j) = map.grad(t, x) * Mat(e.diffusion(i, j));
      }
    }
  });
  return out;
}

double inverse_defect(const SpaceTimeMap& map, const std::vector<std::pair<double, Vec>>& pts) {
  double worst = 0.0;
  for (const auto& [t, x] : pts) {
    worst = std::max(worst, (map.inverse(t, map.h(t, x)) - x).cwiseAbs().maxCoeff());
  }
  return worst;
}

HarmonicReport harmonic_check(const PathEnsemble& e, const SpaceTimeMap& u,
                              std::span<const std::size_t> probes,
                              const MartingaleTestOptions& options, double tol) {
  HarmonicReport r;
  CompensatedSum abs_sum;
  std::size_t count = 0;
  for (const auto j : probes) {
    if (j >= e.steps()) throw GridError("harmonic_check: probe beyond the recorded drifts");
    const double t = e.grid().time(j);
    for (std::size_t i = 0; i < e.n_paths(); ++i) {
      const Vec res = ito_drift(u, t, e.state(i, j), e.drift(i, j), e.alpha(i, j));
      const double a = res.cwiseAbs().maxCoeff();
      r.max_abs_residual = std::max(r.max_abs_residual, a);
      abs_sum.add(a);
      ++count;
    }
  }
  r.mean_abs_residual = count ? abs_sum.value() / static_cast<double>(count) : 0.0;
  r.residual_zero = r.max_abs_residual <= tol;
  const auto samples = sample_process(
      e, u.dim, [&](const PathPrefix& p) { return u.h(p.time(), Vec(p.current())); }, probes);
  r.martingale = martingale_test(samples, e, options);
  r.agree = r.residual_zero == r.martingale.passed;
  return r;
}

namespace maps {

SpaceTimeMap identity(std::size_t dim) {
  return affine(identity_mat(dim), zero_vec(dim));
}

SpaceTimeMap affine(Mat a, Vec b) {
  const auto dim = static_cast<std::size_t>(b.size());
  const Mat inv = a.inverse();
  SpaceTimeMap m;
  m.name = "affine";
  m.dim = dim;
  m.h = [a, b](double, const Vec& x) { return Vec(a * x + b); };
  m.inverse = [inv, b](double, const Vec& y) { return Vec(inv * (y - b)); };
  m.dt_h = [dim](double, const Vec&) { return zero_vec(dim); };
  m.grad = [a](double, const Vec&) { return a; };
  m.hess = [dim](double, const Vec&) { return std::vector<Mat>(dim, zero_mat(dim)); };
  m.affine = true;
  return m;
}

SpaceTimeMap sine_warp(std::size_t dim, double amp) {
  if (!(std::abs(amp) < 1.0)) throw PreconditionError("sine_warp: |amplitude| must be < 1");
  SpaceTimeMap m;
  m.name = "sine_warp";
  m.dim = dim;
  m.h = [amp](double, const Vec& x) { return Vec(x.array() + amp * x.array().sin()); };
  m.inverse = [amp](double, const Vec& y) {
    // Newton iteration on x + amp sin(x) = y (strictly monotone).
    Vec x = y;
    for (int it = 0; it < 60; ++it) {
      const Vec f = x.array() + amp * x.array().sin() - y.array();
      x.array() -= f.array() / (1.0 + amp * x.array().cos());
      if (f.cwiseAbs().maxCoeff() < 1e-15) break;
    }
    return x;
  };
  m.dt_h = [dim](double, const Vec&) { return zero_vec(dim); };
  m.grad = [amp](double, const Vec& x) {
    return Mat((1.0 + amp * x.array().cos()).matrix().asDiagonal());
  };
  m.hess = [amp, dim](double, const Vec& x) {
    std::vector<Mat> out(dim, zero_mat(dim));
    for (std::size_t k = 0; k < dim; ++k) {
      const auto c = static_cast<Eigen::Index>(k);
      out[k](c, c) = -amp * std::sin(x(c));
    }
    return out;
  };
  return m;
}

SpaceTimeMap time_scaling(std::size_t dim, double rate) {
  SpaceTimeMap m;
  m.name = "time_scaling";
  m.dim = dim;
  m.h = [rate](double t, const Vec& x) { return Vec(x * std::exp(rate * t)); };
  m.inverse = [rate](double t, const Vec& y) { return Vec(y * std::exp(-rate * t)); };
  m.dt_h = [rate](double t, const Vec& x) { return Vec(rate * std::exp(rate * t) * x); };
  m.grad = [rate, dim](double t, const Vec&) {
    return Mat(std::exp(rate * t) * identity_mat(dim));
  };
  m.hess = [dim](double, const Vec&) { return std::vector<Mat>(dim, zero_mat(dim)); };
  return m;
}

namespace {

SpaceTimeMap square_like(bool heat) {
  SpaceTimeMap m;
  m.name = heat ? "heat_square" : "square";
  m.dim = 1;
  m.h = [heat](double t, const Vec& x) {
    Vec y(1);
    y(0) = x(0) * x(0) - (heat ? t : 0.0);
    return y;
  };
  m.dt_h = [heat](double, const Vec&) {
    Vec y(1);
    y(0) = heat ? -1.0 : 0.0;
    return y;
  };
  m.grad = [](double, const Vec& x) {
    Mat g(1, 1);
    g(0, 0) = 2.0 * x(0);
    return g;
  };
  m.hess = [](double, const Vec&) {
    Mat h(1, 1);
    h(0, 0) = 2.0;
    return std::vector<Mat>{h};
  };
  return m;
}

}  // namespace

SpaceTimeMap heat_square() { return square_like(true); }
SpaceTimeMap square() { return square_like(false); }

}  // namespace maps
}  // namespace varlab
