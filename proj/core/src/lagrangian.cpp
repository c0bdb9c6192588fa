#include "varlab/lagrangian.hpp"

#include "varlab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace varlab {

Lagrangian linear_combination(double a, const Lagrangian& l1, double b, const Lagrangian& l2) {
  Lagrangian out;
  out.name = l1.name + "+" + l2.name;
  out.eval = [=](double t, const Vec& x, const Vec& v, const Mat& m) {
    return a * l1.eval(t, x, v, m) + b * l2.eval(t, x, v, m);
  };
  out.grad_x = [=](double t, const Vec& x, const Vec& v, const Mat& m) {
    return Vec(a * l1.grad_x(t, x, v, m) + b * l2.grad_x(t, x, v, m));
  };
  out.grad_v = [=](double t, const Vec& x, const Vec& v, const Mat& m) {
    return Vec(a * l1.grad_v(t, x, v, m) + b * l2.grad_v(t, x, v, m));
  };
  const bool has1 = static_cast<bool>(l1.grad_a) || a == 0.0;
  const bool has2 = static_cast<bool>(l2.grad_a) || b == 0.0;
  if (has1 && has2) {
    out.grad_a = [=](double t, const Vec& x, const Vec& v, const Mat& m) {
      Mat g = zero_mat(static_cast<std::size_t>(x.size()));
      if (a != 0.0) g += a * l1.grad_a(t, x, v, m);
      if (b != 0.0) g += b * l2.grad_a(t, x, v, m);
      return g;
    };
  }
  return out;
}

namespace potentials {

Potential zero() {
  return {"zero", [](double, const Vec&) { return 0.0; },
          [](double, const Vec& x) { return Vec(Vec::Zero(x.size())); }};
}

Potential quadratic(double k) {
  return {"quadratic", [k](double, const Vec& x) { return 0.5 * k * x.squaredNorm(); },
          [k](double, const Vec& x) { return Vec(k * x); }};
}

Potential coordinate_square(double c) {
  return {"coordinate_square", [c](double, const Vec& x) { return c * x(0) * x(0); },
          [c](double, const Vec& x) {
            Vec g = Vec::Zero(x.size());
            g(0) = 2.0 * c * x(0);
            return g;
          }};
}

}  // namespace potentials

namespace lagrangians {

Lagrangian kinetic() {
  return with_potential(potentials::zero());
}

Lagrangian with_potential(const Potential& V) {
  Lagrangian l;
  l.name = V.name == "zero" ? "kinetic" : "kinetic-" + V.name;
  l.eval = [V](double t, const Vec& x, const Vec& v, const Mat&) {
    return 0.5 * v.squaredNorm() - V.value(t, x);
  };
  l.grad_x = [V](double t, const Vec& x, const Vec&, const Mat&) { return Vec(-V.grad(t, x)); };
  l.grad_v = [](double, const Vec&, const Vec& v, const Mat&) { return v; };
  l.grad_a = [](double, const Vec& x, const Vec&, const Mat&) {
    return zero_mat(static_cast<std::size_t>(x.size()));
  };
  return l;
}

Lagrangian trace_weighted() {
  Lagrangian l;
  l.name = "trace_weighted";
  l.eval = [](double, const Vec&, const Vec& v, const Mat& a) { return a.trace() * v.squaredNorm(); };
  l.grad_x = [](double, const Vec& x, const Vec&, const Mat&) { return Vec(Vec::Zero(x.size())); };
  l.grad_v = [](double, const Vec&, const Vec& v, const Mat& a) { return Vec(2.0 * a.trace() * v); };
  l.grad_a = [](double, const Vec& x, const Vec& v, const Mat&) {
    return Mat(v.squaredNorm() * identity_mat(static_cast<std::size_t>(x.size())));
  };
  return l;
}

Lagrangian with_potential_and_trace(const Potential& V, double c) {
  Lagrangian l = with_potential(V);
  l.name += "-trace";
  const auto base = l.eval;
  l.eval = [base, c](double t, const Vec& x, const Vec& v, const Mat& a) {
    return base(t, x, v, a) + c * a.trace();
  };
  l.grad_a = [c](double, const Vec& x, const Vec&, const Mat&) {
    return Mat(c * identity_mat(static_cast<std::size_t>(x.size())));
  };
  return l;
}

}  // namespace lagrangians

std::size_t action_steps(const PathEnsemble& e, double horizon) {
  if (!(horizon > 0.0 && horizon <= 1.0)) {
    throw PreconditionError("action: horizon must lie in (0, 1]");
  }
  const auto m = static_cast<double>(e.grid().steps());
  const auto below = static_cast<std::size_t>(std::ceil(horizon * m - 1e-9));
  return std::min(below, e.steps());
}

std::vector<double> path_actions(const PathEnsemble& e, const Lagrangian& L, double horizon) {
  if (!L.eval) throw PreconditionError("action: Lagrangian has no evaluator");
  const std::size_t steps = action_steps(e, horizon);
  const double dt = e.grid().dt();
  std::vector<double> out(e.n_paths());
  parallel_for(e.n_paths(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      CompensatedSum s;
      for (std::size_t j = 0; j < steps; ++j) {
        s.add(L.eval(e.grid().time(j), e.state(i, j), e.drift(i, j), e.alpha(i, j)));
      }
      out[i] = s.value() * dt;
    }
  });
  return out;
}

ActionEstimate action(const PathEnsemble& e, const Lagrangian& L, double horizon) {
  const auto values = path_actions(e, L, horizon);
  const auto ms = e.weights() ? mean_stderr(values, *e.weights()) : mean_stderr(values);
  return {ms.mean, ms.std_error, e.n_paths(), e.grid().steps()};
}

std::vector<GradPoint> sample_grad_points(std::size_t dim, double box, std::size_t count,
                                          std::uint64_t seed) {
  std::vector<GradPoint> pts;
  const auto d = static_cast<Eigen::Index>(dim);
  for (std::size_t k = 0; k < count; ++k) {
    PathRng rng(seed, k, Stream::kAuxiliary);
    auto u = [&] { return box * (2.0 * rng.uniform() - 1.0); };
    GradPoint p;
    p.t = rng.uniform();
    p.x.resize(d);
    p.v.resize(d);
    Mat s(d, d);
    for (Eigen::Index c = 0; c < d; ++c) p.x(c) = u();
    for (Eigen::Index c = 0; c < d; ++c) p.v(c) = u();
    for (Eigen::Index r = 0; r < d; ++r) {
      for (Eigen::Index c = 0; c < d; ++c) s(r, c) = u();
    }
    p.a = s * s.transpose();
    pts.push_back(p);
  }
  return pts;
}

double GradCheckReport::worst() const {
  return std::max({max_error_x, max_error_v, max_error_a});
}

namespace {

double component_error(double analytic, const std::vector<double>& eps_list,
                       const std::function<double(double)>& f) {
  double best = std::numeric_limits<double>::infinity();
  for (double eps : eps_list) {
    const double fd = (f(eps) - f(-eps)) / (2.0 * eps);
    best = std::min(best, std::abs(fd - analytic) / std::max(1.0, std::abs(analytic)));
  }
  return best;
}

}  // namespace

GradCheckReport grad_check(const Lagrangian& L, const std::vector<GradPoint>& points,
                           const std::vector<double>& eps_list) {
  GradCheckReport r;
  for (const auto& p : points) {
    const Eigen::Index d = p.x.size();
    const Vec gx = L.grad_x(p.t, p.x, p.v, p.a);
    const Vec gv = L.grad_v(p.t, p.x, p.v, p.a);
    for (Eigen::Index c = 0; c < d; ++c) {
      r.max_error_x = std::max(r.max_error_x, component_error(gx(c), eps_list, [&](double e) {
        Vec x = p.x;
        x(c) += e;
        return L.eval(p.t, x, p.v, p.a);
      }));
      r.max_error_v = std::max(r.max_error_v, component_error(gv(c), eps_list, [&](double e) {
        Vec v = p.v;
        v(c) += e;
        return L.eval(p.t, p.x, v, p.a);
      }));
    }
    if (L.grad_a) {
      const Mat ga = L.grad_a(p.t, p.x, p.v, p.a);
      for (Eigen::Index r0 = 0; r0 < d; ++r0) {
        for (Eigen::Index c = 0; c < d; ++c) {
          r.max_error_a =
              std::max(r.max_error_a, component_error(ga(r0, c), eps_list, [&](double e) {
                Mat a = p.a;
                a(r0, c) += e;
                return L.eval(p.t, p.x, p.v, a);
              }));
        }
      }
    }
  }
  return r;
}

ProcessSamples el_process(const PathEnsemble& e, const Lagrangian& L,
                          std::span<const std::size_t> steps) {
  if (!L.grad_v || !L.grad_x) throw PreconditionError("el_process: Lagrangian lacks gradients");
  if (!std::is_sorted(steps.begin(), steps.end())) {
    throw PreconditionError("el_process: steps must be sorted");
  }
  for (const auto j : steps) {
    if (j >= e.steps()) throw GridError("el_process: step beyond the recorded drifts");
  }
  ProcessSamples out(e.id(), e.n_paths(), e.dim(), {steps.begin(), steps.end()});
  const double dt = e.grid().dt();
  const auto d = static_cast<Eigen::Index>(e.dim());
  parallel_for(e.n_paths(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      Vec integral = Vec::Zero(d);
      std::size_t j = 0;
      for (std::size_t p = 0; p < steps.size(); ++p) {
        for (; j < steps[p]; ++j) {
          integral += L.grad_x(e.grid().time(j), e.state(i, j), e.drift(i, j), e.alpha(i, j)) * dt;
        }
        const Vec gv = L.grad_v(e.grid().time(j), e.state(i, j), e.drift(i, j), e.alpha(i, j));
        for (Eigen::Index c = 0; c < d; ++c) out.at(i, p, static_cast<std::size_t>(c)) = gv(c) - integral(c);
      }
    }
  });
  return out;
}

ProcessSamples el_process(const PathEnsemble& e, const Lagrangian& L) {
  std::vector<std::size_t> all(e.steps());
  std::iota(all.begin(), all.end(), 0);
  return el_process(e, L, all);
}

}  // namespace varlab
