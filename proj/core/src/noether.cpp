#include "varlab/noether.hpp"

#include "varlab/parallel.hpp"

#include <cmath>

namespace varlab {
namespace families {

NoetherFamily translation(std::size_t dim, std::size_t k) {
  if (k >= dim) throw PreconditionError("translation family: axis out of range");
  Vec e = zero_vec(dim);
  e(static_cast<Eigen::Index>(k)) = 1.0;
  NoetherFamily f;
  f.name = "translation";
  f.dim = dim;
  f.map = [e](double eps, double, const Vec& x) { return Vec(x + eps * e); };
  f.generator = [e](double, const Vec&) { return e; };
  f.generator_grad = [dim](double, const Vec&) { return zero_mat(dim); };
  return f;
}

NoetherFamily rotation() {
  Mat j(2, 2);
  j << 0.0, -1.0, 1.0, 0.0;
  NoetherFamily f;
  f.name = "rotation";
  f.dim = 2;
  f.map = [](double eps, double, const Vec& x) {
    Mat r(2, 2);
    r << std::cos(eps), -std::sin(eps), std::sin(eps), std::cos(eps);
    return Vec(r * x);
  };
  f.generator = [j](double, const Vec& x) { return Vec(j * x); };
  f.generator_grad = [j](double, const Vec&) { return j; };
  return f;
}

}  // namespace families

NoetherResult noether_invariant(const PathEnsemble& e, const Lagrangian& L,
                                const NoetherFamily& family, std::span<const std::size_t> probes,
                                const MartingaleTestOptions& options) {
  if (!L.grad_a) throw PreconditionError("noether_invariant: Lagrangian has no grad_a");
  if (family.dim != e.dim()) throw PreconditionError("noether_invariant: dimension mismatch");
  const std::vector<std::size_t> steps =
      probes.empty() ? default_probe_steps(e) : std::vector<std::size_t>(probes.begin(), probes.end());
  for (const auto j : steps) {
    if (j >= e.steps()) throw GridError("noether_invariant: probe beyond drift records");
  }
  const std::size_t last = steps.back();
  const double dt = e.grid().dt();

  NoetherResult out;
  out.invariant = ProcessSamples(e.id(), e.n_paths(), 1, steps);
  parallel_for(e.n_paths(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      double covariation = 0.0;
      double theta_integral = 0.0;
      std::size_t next = 0;
      Vec u_prev, p_prev;
      for (std::size_t j = 0; j <= last; ++j) {
        const double t = e.grid().time(j);
        const Vec x = e.state(i, j);
        const Vec v = e.drift(i, j);
        const Mat a = e.alpha(i, j);
        const Vec u = family.generator(t, x);
        const Vec p = L.grad_v(t, x, v, a);
        if (j > 0) covariation += (u - u_prev).dot(p - p_prev);
        if (next < steps.size() && steps[next] == j) {
          out.invariant.at(i, next, 0) = u.dot(p) - covariation + theta_integral;
          ++next;
        }
        const Mat g = family.generator_grad(t, x);
        const Mat kappa = a * g.transpose() + g * a;
        theta_integral += kappa.cwiseProduct(L.grad_a(t, x, v, a)).sum() * dt;
        u_prev = u;
        p_prev = p;
      }
    }
  });
  out.martingale = martingale_test(out.invariant, e, options);
  return out;
}

}  // namespace varlab
