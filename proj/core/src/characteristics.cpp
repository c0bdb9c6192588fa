#include "varlab/characteristics.hpp"

#include "varlab/parallel.hpp"

#include <string>

namespace varlab {
namespace features {

FeatureMap constant() {
  return {{"1"}, [](const PathPrefix&, std::span<double> out) { out[0] = 1.0; }};
}

FeatureMap affine(std::size_t dim) {
  FeatureMap m;
  m.names.push_back("1");
  for (std::size_t c = 0; c < dim; ++c) m.names.push_back("x" + std::to_string(c));
  m.evaluate = [dim](const PathPrefix& p, std::span<double> out) {
    const auto x = p.current();
    out[0] = 1.0;
    for (std::size_t c = 0; c < dim; ++c) out[1 + c] = x(static_cast<Eigen::Index>(c));
  };
  return m;
}

FeatureMap quadratic(std::size_t dim, bool with_initial) {
  FeatureMap m;
  m.names.push_back("1");
  for (std::size_t c = 0; c < dim; ++c) m.names.push_back("x" + std::to_string(c));
  for (std::size_t c = 0; c < dim; ++c) m.names.push_back("x" + std::to_string(c) + "^2");
  if (with_initial) {
    for (std::size_t c = 0; c < dim; ++c) m.names.push_back("x0_" + std::to_string(c));
    for (std::size_t c = 0; c < dim; ++c) m.names.push_back("x0_" + std::to_string(c) + "^2");
  }
  m.evaluate = [dim, with_initial](const PathPrefix& p, std::span<double> out) {
    const auto x = p.current();
    std::size_t k = 0;
    out[k++] = 1.0;
    for (std::size_t c = 0; c < dim; ++c) out[k++] = x(static_cast<Eigen::Index>(c));
    for (std::size_t c = 0; c < dim; ++c) {
      const double v = x(static_cast<Eigen::Index>(c));
      out[k++] = v * v;
    }
    if (with_initial) {
      const auto x0 = p.at(0);
      for (std::size_t c = 0; c < dim; ++c) out[k++] = x0(static_cast<Eigen::Index>(c));
      for (std::size_t c = 0; c < dim; ++c) {
        const double v = x0(static_cast<Eigen::Index>(c));
        out[k++] = v * v;
      }
    }
  };
  return m;
}

Eigen::MatrixXd design(const PathEnsemble& ensemble, const FeatureMap& map, std::size_t step) {
  const auto n = ensemble.n_paths();
  const auto p = map.size();
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> x(n, p);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      map.evaluate(ensemble.prefix(i, step), std::span<double>(x.row(i).data(), p));
    }
  });
  return x;
}

}  // namespace features

namespace {

std::vector<double> weight_vector(const PathEnsemble& e) {
  return e.weights() ? *e.weights() : std::vector<double>{};
}

void require_paths(const PathEnsemble& e) {
  if (e.n_paths() < 1000) {
    throw PreconditionError("characteristics: at least 1000 paths are required");
  }
}

void require_step(const PathEnsemble& e, std::size_t j) {
  if (j >= e.steps()) {
    throw GridError("characteristics: probe step " + std::to_string(j) +
                    " has no recorded increment");
  }
}

std::size_t pair_count(std::size_t d) { return d * (d + 1) / 2; }

// Targets at step j: drift columns dW/dt (minus recorded drift when centered)
// and alpha columns for a <= b.
void targets(const PathEnsemble& e, std::size_t j, bool residual, Eigen::MatrixXd& drift,
             Eigen::MatrixXd& alpha) {
  const auto n = e.n_paths();
  const auto d = e.dim();
  const double dt = e.grid().dt();
  drift.resize(n, d);
  alpha.resize(n, pair_count(d));
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::VectorXd dw = e.state(i, j + 1) - e.state(i, j);
    const Eigen::VectorXd v = e.drift(i, j);
    const Eigen::VectorXd centered = residual ? Eigen::VectorXd(dw - v * dt) : dw;
    const Mat a = residual ? e.alpha(i, j) : zero_mat(d);
    std::size_t col = 0;
    for (std::size_t r = 0; r < d; ++r) {
      drift(i, r) = residual ? dw(r) / dt - v(r) : dw(r) / dt;
      for (std::size_t c = r; c < d; ++c) {
        alpha(i, col++) = centered(r) * centered(c) / dt - a(r, c);
      }
    }
  }
}

}  // namespace

std::vector<CharacteristicsEstimate> estimate_characteristics(
    const PathEnsemble& ensemble, const FeatureMap& map, std::span<const std::size_t> steps) {
  require_paths(ensemble);
  const auto w = weight_vector(ensemble);
  std::vector<CharacteristicsEstimate> out;
  for (const auto j : steps) {
    require_step(ensemble, j);
    const Eigen::MatrixXd x = features::design(ensemble, map, j);
    Eigen::MatrixXd drift, alpha;
    targets(ensemble, j, false, drift, alpha);
    out.push_back({j, ensemble.grid().time(j), least_squares(x, drift, w),
                   least_squares(x, alpha, w)});
  }
  return out;
}

std::vector<CharacteristicsCheck> check_recorded_characteristics(
    const PathEnsemble& ensemble, const FeatureMap& map, std::span<const std::size_t> steps) {
  require_paths(ensemble);
  const auto w = weight_vector(ensemble);
  std::vector<CharacteristicsCheck> out;
  for (const auto j : steps) {
    require_step(ensemble, j);
    const Eigen::MatrixXd x = features::design(ensemble, map, j);
    Eigen::MatrixXd drift, alpha;
    targets(ensemble, j, true, drift, alpha);
    out.push_back({j, max_abs_z(least_squares(x, drift, w)),
                   max_abs_z(least_squares(x, alpha, w))});
  }
  return out;
}

}  // namespace varlab
