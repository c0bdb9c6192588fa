#include "varlab/diagnostics.hpp"

#include "varlab/transform.hpp"

#include <algorithm>
#include <cmath>

namespace varlab {
namespace {

std::vector<std::size_t> probes_or_default(const PathEnsemble& e,
                                           std::span<const std::size_t> probes) {
  if (!probes.empty()) return {probes.begin(), probes.end()};
  return default_probe_steps(e);
}

MeanStderr weighted(const PathEnsemble& e, const std::vector<double>& values) {
  return e.weights() ? mean_stderr(values, *e.weights()) : mean_stderr(values);
}

}  // namespace

MartingaleReport el_certify(const PathEnsemble& e, const Lagrangian& L,
                            std::span<const std::size_t> probes,
                            const MartingaleTestOptions& options) {
  const auto steps = probes_or_default(e, probes);
  return martingale_test(el_process(e, L, steps), e, options);
}

VariationalDerivative variational_derivative(const PathEnsemble& e, const Lagrangian& L,
                                             const MaterializedShift& shift,
                                             std::vector<double> eps_list,
                                             std::optional<double> allowance) {
  if (shift.bound_to() != e.id()) {
    throw BindingError("variational_derivative: shift is bound to a different ensemble");
  }
  if (shift.max_endpoint() > kEndpointTolerance) {
    throw PreconditionError("variational_derivative: shift is not endpoint-zero");
  }
  if (eps_list.empty()) throw PreconditionError("variational_derivative: empty epsilon list");
  if (!L.eval || !L.grad_v || !L.grad_x) {
    throw PreconditionError("variational_derivative: Lagrangian lacks an evaluator or gradients");
  }
  std::sort(eps_list.begin(), eps_list.end(), std::greater<>());

  VariationalDerivative out;
  const std::size_t n = e.n_paths();
  const std::size_t action_len = action_steps(e, e.horizon());
  const double dt = e.grid().dt();

  // Shifted actions at +-eps per path, with the same arithmetic as push_shift
  // but without materializing the pushed ensembles.
  auto central_difference = [&](double eps) {
    std::vector<double> diff(n);
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
      Vec xs(e.dim()), vs(e.dim());
      for (std::size_t i = begin; i < end; ++i) {
        CompensatedSum plus, minus;
        for (std::size_t j = 0; j < action_len; ++j) {
          const double t = e.grid().time(j);
          const auto x = e.state(i, j);
          const auto v = e.drift(i, j);
          const auto h = shift.h(i, j);
          const auto hdot = shift.hdot(i, j);
          const Mat a = e.alpha(i, j);
          xs.noalias() = x + eps * h;
          vs.noalias() = v + eps * hdot;
          plus.add(L.eval(t, xs, vs, a));
          xs.noalias() = x - eps * h;
          vs.noalias() = v - eps * hdot;
          minus.add(L.eval(t, xs, vs, a));
        }
        diff[i] = (plus.value() * dt - minus.value() * dt) / (2.0 * eps);
      }
    });
    return diff;
  };

  std::optional<MeanStderr> previous;
  for (const double eps : eps_list) {
    const auto ms = weighted(e, central_difference(eps));
    out.fd = ms.mean;
    out.fd_std_error = ms.std_error;
    out.epsilon = eps;
    if (previous && std::abs(ms.mean - previous->mean) <= 0.1 * ms.std_error) break;
    previous = ms;
  }

  // <xi, h>_H per path, xi_t = grad_v L - int_0^t grad_x L.
  std::vector<double> per_path(n);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    Vec x(e.dim()), v(e.dim()), integral(e.dim());
    for (std::size_t i = begin; i < end; ++i) {
      CompensatedSum inner;
      integral.setZero();
      for (std::size_t j = 0; j < e.steps(); ++j) {
        const double t = e.grid().time(j);
        x = e.state(i, j);
        v = e.drift(i, j);
        const Mat a = e.alpha(i, j);
        inner.add((L.grad_v(t, x, v, a) - integral).dot(shift.hdot(i, j)));
        integral += L.grad_x(t, x, v, a) * dt;
      }
      per_path[i] = inner.value() * dt;
    }
  });

  const auto f = weighted(e, per_path);
  out.formula = f.mean;
  out.formula_std_error = f.std_error;
  const double allow = allowance.value_or(2.0 / static_cast<double>(e.grid().steps()));
  out.tolerance = 4.0 * std::hypot(out.fd_std_error, out.formula_std_error) + allow;
  out.agree = std::abs(out.fd - out.formula) <= out.tolerance;
  return out;
}

AveragedElReport averaged_el(const PathEnsemble& e, const Lagrangian& L,
                             std::span<const std::size_t> steps, double threshold) {
  const auto probes = probes_or_default(e, steps);
  const auto p = el_process(e, L, probes);  // N = p - int grad_x L
  AveragedElReport r;
  std::vector<double> values(e.n_paths());
  for (std::size_t k = 0; k + 1 < probes.size(); ++k) {
    const double ta = e.grid().time(probes[k]);
    const double tb = e.grid().time(probes[k + 1]);
    for (std::size_t c = 0; c < e.dim(); ++c) {
      for (std::size_t i = 0; i < e.n_paths(); ++i) {
        values[i] = (p.at(i, k + 1, c) - p.at(i, k, c)) / (tb - ta);
      }
      const auto ms = weighted(e, values);
      AveragedElRow row{ta, tb, c, ms.mean, ms.std_error, 0.0};
      row.z = ms.mean / std::max(ms.std_error, kStatisticSeFloor);
      r.max_abs_z = std::max(r.max_abs_z, std::abs(row.z));
      r.rows.push_back(row);
    }
  }
  r.passed = r.max_abs_z <= threshold;
  return r;
}

DriftRepresentationReport drift_representation_check(const PathEnsemble& e, const Potential& V,
                                                     const FeatureMap& features,
                                                     std::span<const std::size_t> probes,
                                                     std::optional<Vec> terminal,
                                                     double threshold) {
  const std::size_t m = e.grid().steps();
  const bool full = e.steps() == m;
  if (!full && !terminal) {
    throw PreconditionError(
        "drift_representation_check: paths stop before t = 1 and no terminal value is known");
  }
  const bool zero_potential = V.name == "zero";
  if (!full && !zero_potential) {
    throw UnsupportedError(
        "drift_representation_check: a nonzero potential needs paths reaching t = 1");
  }
  const std::size_t n = e.n_paths();
  const std::size_t d = e.dim();
  const double dt = e.grid().dt();
  const std::vector<double> w = e.weights() ? *e.weights() : std::vector<double>{};

  DriftRepresentationReport r;
  for (const auto k : probes) {
    if (k >= e.steps()) throw GridError("drift_representation_check: probe beyond drift records");
    const double t = e.grid().time(k);
    Eigen::MatrixXd target(n, d);
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        const Vec w1 = full ? Vec(e.state(i, m)) : *terminal;
        Vec xi = (w1 - Vec(e.state(i, k))) / (1.0 - t);
        if (!zero_potential) {
          for (std::size_t j = k; j < m; ++j) {
            const double s = e.grid().time(j);
            xi += (1.0 - s) / (1.0 - t) * V.grad(s, e.state(i, j)) * dt;
          }
        }
        target.row(static_cast<Eigen::Index>(i)) = (xi - Vec(e.drift(i, k))).transpose();
      }
    });
    const auto fit = least_squares(features::design(e, features, k), target, w);
    DriftRepresentationRow row{k, t, max_abs_z(fit)};
    r.max_z = std::max(r.max_z, row.max_z);
    r.rows.push_back(row);
  }
  r.passed = r.max_z <= threshold;
  return r;
}

}  // namespace varlab
