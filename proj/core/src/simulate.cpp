#include "varlab/model.hpp"
#include "varlab/parallel.hpp"

#include <cmath>
#include <string>

namespace varlab {
namespace {

bool all_finite(const auto& m) { return m.allFinite(); }

std::string where(std::size_t i, std::size_t j) {
  return " (path " + std::to_string(i) + ", step " + std::to_string(j) + ")";
}

Mat constant_factor(const SemimartingaleModel& model, const TimeGrid& grid) {
  std::vector<double> zeros(model.dim, 0.0);
  const Mat s = model.diffusion_factor(PathPrefix(zeros, model.dim, 0, grid));
  if (!all_finite(s)) throw SimulationError("non-finite constant diffusion factor");
  return s;
}

}  // namespace

PathEnsemble simulate(const SemimartingaleModel& model, const TimeGrid& grid,
                      std::size_t n_paths, std::uint64_t seed, SimulationOptions options) {
  if (n_paths == 0) throw PreconditionError("simulate: n_paths must be >= 1");
  const std::size_t m = grid.steps();
  const std::size_t k = options.steps.value_or(model.singular_at_end ? m - 1 : m);
  if (k == 0 || k > m) throw GridError("simulate: horizon must cover 1..M steps");

  const auto storage = model.constant_diffusion ? PathEnsemble::DiffusionStorage::kConstant
                                                : PathEnsemble::DiffusionStorage::kPerStep;
  PathEnsemble ens(grid, n_paths, model.dim, k, seed, storage);
  const auto d = static_cast<Eigen::Index>(model.dim);
  if (model.constant_diffusion) ens.diffusion(0, 0) = constant_factor(model, grid);

  const double dt = grid.dt();
  const double sqrt_dt = std::sqrt(dt);

  parallel_for(n_paths, [&](std::size_t begin, std::size_t end) {
    Vec noise(d);
    for (std::size_t i = begin; i < end; ++i) {
      PathRng init(seed, i, Stream::kInitial);
      const Vec x0 = model.initial(init);
      if (x0.size() != d || !all_finite(x0)) {
        throw SimulationError("non-finite or mis-sized initial state" + where(i, 0));
      }
      ens.state(i, 0) = x0;

      PathRng rng(seed, i, Stream::kIncrements);
      for (std::size_t j = 0; j < k; ++j) {
        const PathPrefix prefix = ens.prefix(i, j);
        const Vec v = model.drift(prefix);
        if (v.size() != d || !all_finite(v)) {
          throw SimulationError("non-finite drift" + where(i, j));
        }
        ens.drift(i, j) = v;
        for (Eigen::Index c = 0; c < d; ++c) noise(c) = rng.normal() * sqrt_dt;

        Vec step = v * dt;
        if (model.constant_diffusion) {
          step += ens.diffusion(i, j) * noise;
        } else {
          const Mat s = model.diffusion_factor(prefix);
          if (s.rows() != d || s.cols() != d || !all_finite(s)) {
            throw SimulationError("non-finite diffusion factor" + where(i, j));
          }
          ens.diffusion(i, j) = s;
          step += s * noise;
        }
        ens.state(i, j + 1) = ens.state(i, j) + step;
      }
    }
  });
  return ens;
}

PathEnsemble reweight(const PathEnsemble& base, const PathFunctional& density,
                      const SemimartingaleModel& target) {
  if (target.dim != base.dim()) throw PreconditionError("reweight: dimension mismatch");
  const auto storage = target.constant_diffusion ? PathEnsemble::DiffusionStorage::kConstant
                                                 : PathEnsemble::DiffusionStorage::kPerStep;
  PathEnsemble out(base.grid(), base.n_paths(), base.dim(), base.steps(), base.seed(), storage);
  out.states_data() = base.states_data();
  if (target.constant_diffusion) out.diffusion(0, 0) = constant_factor(target, base.grid());

  std::vector<double> raw(base.n_paths());
  parallel_for(base.n_paths(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t j = 0; j < base.steps(); ++j) {
        const PathPrefix prefix = out.prefix(i, j);
        const Vec v = target.drift(prefix);
        if (!all_finite(v)) throw SimulationError("non-finite drift" + where(i, j));
        out.drift(i, j) = v;
        if (!target.constant_diffusion) out.diffusion(i, j) = target.diffusion_factor(prefix);
      }
      raw[i] = density(out.prefix(i, base.steps()));
    }
  });
  out.set_weights(std::move(raw));
  return out;
}

AdaptednessReport probe_adaptedness(const PrefixVectorFn& f, std::size_t dim,
                                    const TimeGrid& grid, std::uint64_t seed,
                                    std::size_t trials) {
  AdaptednessReport report;
  const std::size_t m = grid.steps();
  const double sqrt_dt = std::sqrt(grid.dt());
  for (std::size_t trial = 0; trial < trials; ++trial) {
    PathRng rng(seed, trial, Stream::kAuxiliary);
    std::vector<double> a((m + 1) * dim, 0.0);
    for (std::size_t j = 1; j <= m; ++j) {
      for (std::size_t c = 0; c < dim; ++c) {
        a[j * dim + c] = a[(j - 1) * dim + c] + rng.normal() * sqrt_dt;
      }
    }
    const std::size_t j = std::min(m - 1, static_cast<std::size_t>(rng.uniform() * m));
    std::vector<double> b = a;
    for (std::size_t k = j + 1; k <= m; ++k) {
      for (std::size_t c = 0; c < dim; ++c) b[k * dim + c] += 1.0 + rng.normal();
    }
    try {
      const Vec fa = f(PathPrefix(a, dim, j, grid));
      const Vec fb = f(PathPrefix(b, dim, j, grid));
      if (fa.size() != fb.size() || (fa - fb).cwiseAbs().maxCoeff() != 0.0) {
        report.adapted = false;
        report.first_violation_step = j;
        report.detail = "value at step " + std::to_string(j) + " depends on the future";
        return report;
      }
    } catch (const std::out_of_range& e) {
      report.adapted = false;
      report.first_violation_step = j;
      report.detail = e.what();
      return report;
    }
  }
  return report;
}

}  // namespace varlab
