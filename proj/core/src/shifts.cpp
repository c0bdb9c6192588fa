#include "varlab/shifts.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace varlab {

MaterializedShift::MaterializedShift(const PathEnsemble& e)
    : bound_to_(e.id()),
      grid_(e.grid()),
      n_paths_(e.n_paths()),
      dim_(e.dim()),
      steps_(e.steps()),
      hdot_(n_paths_ * steps_ * dim_, 0.0),
      h_(n_paths_ * (steps_ + 1) * dim_, 0.0) {}

Eigen::Map<const Eigen::VectorXd> MaterializedShift::hdot(std::size_t i, std::size_t j) const {
  return {hdot_.data() + (i * steps_ + j) * dim_, static_cast<Eigen::Index>(dim_)};
}

Eigen::Map<Eigen::VectorXd> MaterializedShift::hdot(std::size_t i, std::size_t j) {
  return {hdot_.data() + (i * steps_ + j) * dim_, static_cast<Eigen::Index>(dim_)};
}

Eigen::Map<const Eigen::VectorXd> MaterializedShift::h(std::size_t i, std::size_t j) const {
  return {h_.data() + (i * (steps_ + 1) + j) * dim_, static_cast<Eigen::Index>(dim_)};
}

void MaterializedShift::integrate(bool snap_endpoint) {
  const double dt = grid_.dt();
  for (std::size_t i = 0; i < n_paths_; ++i) {
    double* hp = h_.data() + i * (steps_ + 1) * dim_;
    const double* dp = hdot_.data() + i * steps_ * dim_;
    for (std::size_t c = 0; c < dim_; ++c) hp[c] = 0.0;
    for (std::size_t j = 0; j < steps_; ++j) {
      for (std::size_t c = 0; c < dim_; ++c) {
        hp[(j + 1) * dim_ + c] = hp[j * dim_ + c] + dp[j * dim_ + c] * dt;
      }
    }
    if (snap_endpoint) {
      for (std::size_t c = 0; c < dim_; ++c) hp[steps_ * dim_ + c] = 0.0;
    }
  }
}

double MaterializedShift::h_norm_sq(std::size_t i) const {
  CompensatedSum s;
  for (std::size_t j = 0; j < steps_; ++j) s.add(hdot(i, j).squaredNorm());
  return s.value() * grid_.dt();
}

double MaterializedShift::sup_norm(std::size_t i) const {
  double best = 0.0;
  for (std::size_t j = 0; j <= steps_; ++j) best = std::max(best, h(i, j).norm());
  return best;
}

double MaterializedShift::max_endpoint() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < n_paths_; ++i) worst = std::max(worst, h(i, steps_).norm());
  return worst;
}

MaterializedShift materialize(const AdaptedShift& shift, const PathEnsemble& e) {
  if (shift.dim != e.dim()) throw PreconditionError("materialize: dimension mismatch");
  MaterializedShift out(e);
  parallel_for(e.n_paths(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t j = 0; j < e.steps(); ++j) {
        const Vec v = shift.derivative(e.prefix(i, j));
        if (v.size() != static_cast<Eigen::Index>(e.dim()) || !v.allFinite()) {
          throw SimulationError("materialize: non-finite derivative of shift '" + shift.name +
                                "' (path " + std::to_string(i) + ", step " +
                                std::to_string(j) + ")");
        }
        out.hdot(i, j) = v;
      }
    }
  });
  out.integrate();
  return out;
}

namespace {

void require_same_binding(const MaterializedShift& u, std::uint64_t id, const char* what) {
  if (u.bound_to() != id) {
    throw BindingError(std::string(what) + ": shift is bound to a different ensemble");
  }
}

void require_divisible(const MaterializedShift& u, std::size_t n) {
  if (n < 3) throw GridError("variation operator: n must be at least 3");
  if (u.grid().steps() % n != 0) {
    throw GridError("variation operator: grid steps " + std::to_string(u.grid().steps()) +
                    " not divisible by n = " + std::to_string(n));
  }
}

void require_full_horizon(const MaterializedShift& u) {
  if (u.steps() != u.grid().steps()) {
    throw GridError("endpoint operator: shift must cover the full interval [0, 1]");
  }
}

MaterializedShift blank_like(const MaterializedShift& u) {
  MaterializedShift out = u;
  std::fill(out.hdot_data().begin(), out.hdot_data().end(), 0.0);
  return out;
}

}  // namespace

MaterializedShift combine(double a, const MaterializedShift& u, double b,
                          const MaterializedShift& v) {
  require_same_binding(v, u.bound_to(), "combine");
  MaterializedShift out = u;
  for (std::size_t i = 0; i < u.n_paths(); ++i) {
    for (std::size_t j = 0; j < u.steps(); ++j) out.hdot(i, j) = a * u.hdot(i, j) + b * v.hdot(i, j);
  }
  out.integrate();
  return out;
}

MeanStderr h_inner(const PathEnsemble& e, const MaterializedShift& u,
                   const MaterializedShift& v) {
  require_same_binding(u, e.id(), "h_inner");
  require_same_binding(v, e.id(), "h_inner");
  std::vector<double> per_path(e.n_paths());
  const double dt = e.grid().dt();
  parallel_for(e.n_paths(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      CompensatedSum s;
      for (std::size_t j = 0; j < u.steps(); ++j) s.add(u.hdot(i, j).dot(v.hdot(i, j)));
      per_path[i] = s.value() * dt;
    }
  });
  return e.weights() ? mean_stderr(per_path, *e.weights()) : mean_stderr(per_path);
}

MaterializedShift delay_pn(const MaterializedShift& u, std::size_t n) {
  require_divisible(u, n);
  const std::size_t b = u.grid().steps() / n;
  const double scale = static_cast<double>(n);
  MaterializedShift out = blank_like(u);
  for (std::size_t i = 0; i < u.n_paths(); ++i) {
    for (std::size_t j = 2 * b; j < u.steps(); ++j) {
      const std::size_t k = j / b;
      out.hdot(i, j) = scale * (u.h(i, (k - 1) * b) - u.h(i, (k - 2) * b));
    }
  }
  out.integrate();
  return out;
}

MaterializedShift endpoint_qn(const MaterializedShift& u, std::size_t n) {
  require_divisible(u, n);
  require_full_horizon(u);
  const std::size_t b = u.grid().steps() / n;
  const double scale = static_cast<double>(n);
  MaterializedShift out = blank_like(u);
  for (std::size_t i = 0; i < u.n_paths(); ++i) {
    for (std::size_t j = (n - 1) * b; j < u.steps(); ++j) {
      out.hdot(i, j) = scale * u.h(i, (n - 2) * b);
    }
  }
  out.integrate();
  return out;
}

MaterializedShift endpoint_rn(const MaterializedShift& u, std::size_t n) {
  require_full_horizon(u);
  const MaterializedShift p = delay_pn(u, n);
  const MaterializedShift q = endpoint_qn(u, n);
  MaterializedShift out = blank_like(u);
  for (std::size_t i = 0; i < u.n_paths(); ++i) {
    for (std::size_t j = 0; j < u.steps(); ++j) out.hdot(i, j) = p.hdot(i, j) - q.hdot(i, j);
  }
  out.integrate(true);
  return out;
}

std::size_t truncation_step(const MaterializedShift& u, std::size_t i, double level) {
  const double bound = level * level;
  const double dt = u.grid().dt();
  CompensatedSum s;
  for (std::size_t j = 0; j < u.steps(); ++j) {
    if (s.value() * dt > bound) return j;
    s.add(u.hdot(i, j).squaredNorm());
  }
  return u.steps();
}

MaterializedShift stop_truncate(const MaterializedShift& u, double level) {
  if (!(level > 0.0)) throw PreconditionError("stop_truncate: level must be positive");
  if (u.max_endpoint() > kEndpointTolerance) {
    throw PreconditionError("stop_truncate: input shift is not endpoint-zero");
  }
  const double horizon = u.horizon();
  MaterializedShift out = blank_like(u);
  for (std::size_t i = 0; i < u.n_paths(); ++i) {
    const std::size_t tau = truncation_step(u, i, level);
    for (std::size_t j = 0; j < tau; ++j) out.hdot(i, j) = u.hdot(i, j);
    if (tau < u.steps()) {
      const Eigen::VectorXd ramp = -u.h(i, tau) / (horizon - u.grid().time(tau));
      for (std::size_t j = tau; j < u.steps(); ++j) out.hdot(i, j) = ramp;
    }
  }
  out.integrate(true);
  return out;
}

Projection martingale_projection(const PathEnsemble& e, const MaterializedShift& u,
                                 const FeatureMap& features) {
  require_same_binding(u, e.id(), "martingale_projection");
  if (e.n_paths() < 1000) {
    throw PreconditionError("martingale_projection: at least 1000 paths are required");
  }
  const std::size_t n = e.n_paths();
  const std::size_t d = e.dim();
  const std::size_t k_max = e.steps();
  const std::size_t p = features.size();
  const double horizon = e.horizon();
  const double dt = e.grid().dt();
  const std::vector<double> w = e.weights() ? *e.weights() : std::vector<double>{};

  MaterializedShift m = blank_like(u);
  ProjectionReport report;
  // Running integral S_k = sum_{j<k} mdot_j dt, per path and coordinate.
  Eigen::MatrixXd running = Eigen::MatrixXd::Zero(n, d);

  for (std::size_t k = 0; k < k_max; ++k) {
    Eigen::MatrixXd x(n, p + d);
    x.leftCols(p) = features::design(e, features, k);
    Eigen::MatrixXd target(n, d);
    for (std::size_t i = 0; i < n; ++i) {
      x.row(i).tail(d) = u.hdot(i, k).transpose();
      target.row(i) = (u.h(i, k_max) - u.h(i, k)).transpose();
    }
    const auto keep = independent_columns(x, 0);
    Eigen::MatrixXd reduced(n, keep.size());
    for (std::size_t c = 0; c < keep.size(); ++c) reduced.col(c) = x.col(keep[c]);
    report.retained_columns.push_back(keep.size());
    const RegressionResult fit = least_squares(reduced, target, w);
    const double remaining = horizon - e.grid().time(k);
    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::VectorXd a = u.h(i, k) + fit.fitted.row(i).transpose();
      const Eigen::VectorXd mdot = (a - running.row(i).transpose()) / remaining;
      m.hdot(i, k) = mdot;
      running.row(i) += mdot.transpose() * dt;
    }
  }
  m.integrate();
  MaterializedShift h0 = combine(1.0, u, -1.0, m);

  report.orthogonality = h_inner(e, m, h0);
  std::vector<double> endpoint(n), scale(n);
  for (std::size_t i = 0; i < n; ++i) {
    endpoint[i] = h0.h(i, k_max).squaredNorm();
    scale[i] = u.h_norm_sq(i);
  }
  const auto wv = std::span<const double>(w);
  report.endpoint_defect = mean_stderr(endpoint, wv).mean;
  report.norm_scale = mean_stderr(scale, wv).mean;
  return {std::move(m), std::move(h0), std::move(report)};
}

namespace shifts {

AdaptedShift constant(Vec c) {
  const auto d = static_cast<std::size_t>(c.size());
  return {"constant", d, [c](const PathPrefix&) { return c; }};
}

AdaptedShift state(std::size_t dim) {
  return {"state", dim, [](const PathPrefix& p) { return Vec(p.current()); }};
}

AdaptedShift square_wave(Vec c) {
  const auto d = static_cast<std::size_t>(c.size());
  return {"square_wave", d, [c](const PathPrefix& p) {
            return Vec(p.time() < 0.5 ? c : Vec(-c));
          }};
}

AdaptedShift cosine(Vec c, int k) {
  const auto d = static_cast<std::size_t>(c.size());
  return {"cosine", d, [c, k](const PathPrefix& p) {
            return Vec(c * std::cos(2.0 * std::numbers::pi * k * p.time()));
          }};
}

AdaptedShift sine_state(std::size_t dim) {
  return {"sine_state", dim, [](const PathPrefix& p) {
            return Vec(p.current().array().sin() * std::cos(2.0 * std::numbers::pi * p.time()));
          }};
}

}  // namespace shifts
}  // namespace varlab
