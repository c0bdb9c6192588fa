#include "varlab/sinkhorn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace varlab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kMassTolerance = 1e-12;

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

/// P(a < Z < b) for standard normal Z, accurate in both tails.
double normal_interval(double a, double b) {
  if (a >= 0.0) return 0.5 * (std::erfc(a / std::sqrt(2.0)) - std::erfc(b / std::sqrt(2.0)));
  if (b <= 0.0) return 0.5 * (std::erfc(-b / std::sqrt(2.0)) - std::erfc(-a / std::sqrt(2.0)));
  return normal_cdf(b) - normal_cdf(a);
}

double log_sum_exp(const double* values, std::size_t n) {
  double m = kNegInf;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, values[i]);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::exp(values[i] - m);
  return m + std::log(s);
}

double safe_log(double x) { return x > 0.0 ? std::log(x) : kNegInf; }

void validate_lattice(const Lattice& lattice) {
  if (lattice.cells < 3 || !(lattice.x_max > lattice.x_min)) {
    throw PreconditionError("lattice needs at least 3 cells and x_max > x_min");
  }
}

void validate_marginal(const Lattice& lattice, const std::vector<double>& nu, const char* which) {
  if (nu.size() != lattice.cells) {
    throw PreconditionError(std::string(which) + ": size does not match the lattice");
  }
  double total = 0.0;
  for (double m : nu) {
    if (!(m >= 0.0) || !std::isfinite(m)) {
      throw PreconditionError(std::string(which) + ": masses must be finite and nonnegative");
    }
    total += m;
  }
  if (std::abs(total - 1.0) > kMassTolerance) {
    std::ostringstream msg;
    msg << which << ": masses sum to " << total << ", expected 1";
    throw PreconditionError(msg.str());
  }
}

Eigen::MatrixXd matrix_power(Eigen::MatrixXd base, std::size_t exponent) {
  Eigen::MatrixXd result = Eigen::MatrixXd::Identity(base.rows(), base.cols());
  bool first = true;
  while (exponent > 0) {
    if (exponent & 1U) {
      if (first) {
        result = base;
        first = false;
      } else {
        result = (result * base).eval();
      }
    }
    exponent >>= 1U;
    if (exponent > 0) base = (base * base).eval();
  }
  return result;
}

}  // namespace

std::size_t Lattice::nearest(double x) const {
  const double r = std::round((x - x_min) / spacing());
  if (r <= 0.0) return 0;
  if (r >= static_cast<double>(cells - 1)) return cells - 1;
  return static_cast<std::size_t>(r);
}

namespace marginals {

std::vector<double> point_mass(const Lattice& lattice, double x) {
  validate_lattice(lattice);
  std::vector<double> nu(lattice.cells, 0.0);
  nu[lattice.nearest(x)] = 1.0;
  return nu;
}

std::vector<double> gaussian(const Lattice& lattice, double mean, double variance) {
  validate_lattice(lattice);
  if (!(variance > 0.0)) throw PreconditionError("gaussian marginal needs positive variance");
  const double sd = std::sqrt(variance);
  const double half = 0.5 * lattice.spacing();
  std::vector<double> nu(lattice.cells);
  for (std::size_t i = 0; i < lattice.cells; ++i) {
    const double c = lattice.center(i);
    nu[i] = normal_interval((c - half - mean) / sd, (c + half - mean) / sd);
  }
  const double total = std::accumulate(nu.begin(), nu.end(), 0.0);
  for (double& m : nu) m /= total;
  return nu;
}

std::vector<double> read_csv(const Lattice& lattice, const std::filesystem::path& file) {
  validate_lattice(lattice);
  std::ifstream in(file);
  if (!in) throw Error("cannot open marginal file " + file.string());
  std::vector<double> nu(lattice.cells, 0.0);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double x = 0.0;
    double mass = 0.0;
    if (!(row >> x >> mass)) {
      if (line_no == 1) continue;  // header
      throw Error(file.string() + ":" + std::to_string(line_no) + ": expected 'center,mass'");
    }
    const std::size_t i = lattice.nearest(x);
    if (std::abs(lattice.center(i) - x) > 1e-6 * lattice.spacing()) {
      throw PreconditionError(file.string() + ":" + std::to_string(line_no) +
                              ": center is not on the lattice");
    }
    nu[i] += mass;
  }
  validate_marginal(lattice, nu, file.string().c_str());
  return nu;
}

}  // namespace marginals

Eigen::MatrixXd lattice_heat_step(const Lattice& lattice, double dt) {
  validate_lattice(lattice);
  const double delta = lattice.spacing();
  const double variance = dt - delta * delta / 12.0;
  if (!(variance > 0.0)) {
    throw PreconditionError("lattice too coarse for the time step: need dt > spacing^2/12");
  }
  const double sd = std::sqrt(variance);
  const std::size_t n = lattice.cells;
  Eigen::MatrixXd p(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double offset = static_cast<double>(j) - static_cast<double>(i);
      p(i, j) = normal_interval((offset - 0.5) * delta / sd, (offset + 0.5) * delta / sd);
    }
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

BridgeSolution sinkhorn_bridge(const BridgeProblem& problem, const TimeGrid& grid,
                               const SinkhornOptions& options) {
  const Lattice& lattice = problem.lattice;
  validate_lattice(lattice);
  validate_marginal(lattice, problem.nu0, "nu0");
  validate_marginal(lattice, problem.nu1, "nu1");
  const std::size_t n = lattice.cells;
  const std::size_t steps = grid.steps();

  const Eigen::MatrixXd step = lattice_heat_step(lattice, grid.dt());
  const Eigen::MatrixXd kernel = matrix_power(step, steps);
  if (!(kernel.minCoeff() > 0.0)) {
    throw ConvergenceError("time-one heat kernel underflows on this lattice; narrow it");
  }
  const Eigen::MatrixXd log_kernel = kernel.array().log().matrix();

  std::vector<double> log_nu0(n);
  std::vector<double> log_nu1(n);
  for (std::size_t i = 0; i < n; ++i) {
    log_nu0[i] = safe_log(problem.nu0[i]);
    log_nu1[i] = safe_log(problem.nu1[i]);
  }

  // Coupling pi_ij = exp(log_a_i + log K_ij + log_b_j).
  std::vector<double> log_a(n, 0.0);
  std::vector<double> log_b(n, 0.0);
  std::vector<double> scratch(n);

  auto update_a = [&] {
    for (std::size_t i = 0; i < n; ++i) {
      if (log_nu0[i] == kNegInf) {
        log_a[i] = kNegInf;
        continue;
      }
      for (std::size_t j = 0; j < n; ++j) scratch[j] = log_kernel(i, j) + log_b[j];
      log_a[i] = log_nu0[i] - log_sum_exp(scratch.data(), n);
    }
  };
  auto update_b = [&] {
    for (std::size_t j = 0; j < n; ++j) {
      if (log_nu1[j] == kNegInf) {
        log_b[j] = kNegInf;
        continue;
      }
      for (std::size_t i = 0; i < n; ++i) scratch[i] = log_a[i] + log_kernel(i, j);
      log_b[j] = log_nu1[j] - log_sum_exp(scratch.data(), n);
    }
  };
  // After the b update the nu1 marginal is exact; the nu0 marginal carries the error.
  auto nu0_error = [&] {
    double tv = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (log_a[i] == kNegInf) continue;
      for (std::size_t j = 0; j < n; ++j) scratch[j] = log_kernel(i, j) + log_b[j];
      tv += std::abs(std::exp(log_a[i] + log_sum_exp(scratch.data(), n)) - problem.nu0[i]);
    }
    return 0.5 * tv;
  };

  BridgeSolution out;
  out.lattice = lattice;
  out.grid = grid;
  out.nu0 = problem.nu0;
  out.nu1 = problem.nu1;

  bool converged = false;
  for (std::size_t it = 0; it < options.max_iter; ++it) {
    update_a();
    update_b();
    out.marginal_errors.push_back(nu0_error());
    out.iterations = it + 1;
    if (out.marginal_errors.back() < options.tol) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    std::ostringstream msg;
    msg << "sinkhorn did not reach tol " << options.tol << " in " << options.max_iter
        << " iterations (last error " << out.marginal_errors.back() << ")";
    throw ConvergenceError(msg.str());
  }

  // Potentials relative to the marginals: pi_ij = nu0_i phi0_i K_ij phi1_j.
  out.log_phi0.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.log_phi0[i] = log_nu0[i] == kNegInf ? kNegInf : log_a[i] - log_nu0[i];
  }
  out.log_phi1 = log_b;

  double entropy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (log_a[i] == kNegInf) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (log_b[j] == kNegInf) continue;
      const double pi = std::exp(log_a[i] + log_kernel(i, j) + log_b[j]);
      entropy += pi * (out.log_phi0[i] + out.log_phi1[j]);
    }
  }
  out.entropy = entropy;

  // Backward propagation h(t_j) = P h(t_{j+1}) in the linear domain, rescaled
  // per row to keep it in range; the scale is returned to the log.
  out.log_h.assign((steps + 1) * n, 0.0);
  Eigen::VectorXd h(n);
  double log_scale = kNegInf;
  for (std::size_t i = 0; i < n; ++i) log_scale = std::max(log_scale, log_b[i]);
  for (std::size_t i = 0; i < n; ++i) h[i] = std::exp(log_b[i] - log_scale);
  for (std::size_t i = 0; i < n; ++i) out.log_h[steps * n + i] = safe_log(h[i]) + log_scale;
  double defect = 0.0;
  for (std::size_t j = steps; j-- > 0;) {
    Eigen::VectorXd prev = step * h;
    const double m = prev.maxCoeff();
    prev /= m;
    log_scale += std::log(m);
    for (std::size_t i = 0; i < n; ++i) {
      if (!(prev[i] > 0.0)) throw ConvergenceError("h underflows during backward propagation");
      out.log_h[j * n + i] = std::log(prev[i]) + log_scale;
    }
    // Check against the stored logs, independent of the running scale.
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      const double ref = out.log_h[j * n + i];
      for (std::size_t k = 0; k < n; ++k) {
        if (step(i, k) == 0.0) continue;
        s += step(i, k) * std::exp(out.log_h[(j + 1) * n + k] - ref);
      }
      defect = std::max(defect, std::abs(s - 1.0));
    }
    h = prev;
  }
  out.harmonic_defect = defect;
  if (defect > 1e-10) {
    throw ConvergenceError("h propagation lost space-time harmonicity");
  }

  const double delta = lattice.spacing();
  out.drift.assign(steps * n, 0.0);
  for (std::size_t j = 0; j < steps; ++j) {
    const double* lh = &out.log_h[j * n];
    for (std::size_t i = 0; i < n; ++i) {
      double v;
      if (i == 0) {
        v = (lh[1] - lh[0]) / delta;
      } else if (i == n - 1) {
        v = (lh[n - 1] - lh[n - 2]) / delta;
      } else {
        v = (lh[i + 1] - lh[i - 1]) / (2.0 * delta);
      }
      out.drift[j * n + i] = v;
    }
  }
  return out;
}

BridgeModel bridge_to_model(std::shared_ptr<const BridgeSolution> solution) {
  if (!solution || solution->drift.empty()) {
    throw PreconditionError("bridge_to_model needs a solved drift field");
  }
  const std::size_t n = solution->lattice.cells;
  std::vector<double> cdf(n);
  std::partial_sum(solution->nu0.begin(), solution->nu0.end(), cdf.begin());
  auto cdf_ptr = std::make_shared<const std::vector<double>>(std::move(cdf));
  auto clamped = std::make_shared<std::atomic<std::size_t>>(0);

  BridgeModel out;
  out.clamped = clamped;
  SemimartingaleModel& m = out.model;
  m.name = "schroedinger_bridge";
  m.dim = 1;
  m.constant_diffusion = true;
  m.initial = [solution, cdf_ptr](PathRng& rng) {
    const double u = rng.uniform() * cdf_ptr->back();
    auto it = std::upper_bound(cdf_ptr->begin(), cdf_ptr->end(), u);
    std::size_t i = static_cast<std::size_t>(it - cdf_ptr->begin());
    i = std::min(i, cdf_ptr->size() - 1);
    while (i > 0 && solution->nu0[i] == 0.0) --i;
    Vec x = zero_vec(1);
    x[0] = solution->lattice.center(i);
    return x;
  };
  m.diffusion_factor = [](const PathPrefix&) { return identity_mat(1); };
  m.drift = [solution, clamped](const PathPrefix& p) {
    const BridgeSolution& s = *solution;
    const Lattice& lat = s.lattice;
    const std::size_t rows = s.grid.steps();

    double x = p.current()[0];
    if (x < lat.x_min || x > lat.x_max) {
      clamped->fetch_add(1, std::memory_order_relaxed);
      x = std::clamp(x, lat.x_min, lat.x_max);
    }
    const double fx = (x - lat.x_min) / lat.spacing();
    const std::size_t i0 = std::min(static_cast<std::size_t>(fx), lat.cells - 2);
    const double wx = fx - static_cast<double>(i0);

    const double ft = std::clamp(p.time() / s.grid.dt(), 0.0, static_cast<double>(rows - 1));
    const std::size_t j0 = std::min(static_cast<std::size_t>(ft), rows - 1);
    const std::size_t j1 = std::min(j0 + 1, rows - 1);
    const double wt = ft - static_cast<double>(j0);

    auto row = [&](std::size_t j) {
      return (1.0 - wx) * s.drift_at(j, i0) + wx * s.drift_at(j, i0 + 1);
    };
    Vec v = zero_vec(1);
    v[0] = (1.0 - wt) * row(j0) + wt * row(j1);
    return v;
  };
  return out;
}

void write_drift_csv(const BridgeSolution& solution, std::ostream& os) {
  const auto precision = os.precision(17);
  os << "t,x,v\n";
  for (std::size_t j = 0; j < solution.grid.steps(); ++j) {
    for (std::size_t i = 0; i < solution.lattice.cells; ++i) {
      os << solution.grid.time(j) << ',' << solution.lattice.center(i) << ','
         << solution.drift_at(j, i) << '\n';
    }
  }
  os.precision(precision);
}

void write_drift_csv(const BridgeSolution& solution, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw Error("cannot write " + file.string());
  write_drift_csv(solution, out);
}

double terminal_tv(const PathEnsemble& ensemble, const BridgeSolution& solution,
                   std::size_t cells_per_bin) {
  if (cells_per_bin == 0) throw PreconditionError("cells_per_bin must be positive");
  if (ensemble.dim() != 1) throw PreconditionError("terminal_tv needs a 1-d ensemble");
  const Lattice& lat = solution.lattice;
  const std::size_t bins = (lat.cells + cells_per_bin - 1) / cells_per_bin;
  std::vector<double> target(bins, 0.0);
  for (std::size_t i = 0; i < lat.cells; ++i) target[i / cells_per_bin] += solution.nu1[i];
  std::vector<double> empirical(bins, 0.0);
  const std::size_t k = ensemble.steps();
  for (std::size_t p = 0; p < ensemble.n_paths(); ++p) {
    empirical[lat.nearest(ensemble.state(p, k)[0]) / cells_per_bin] += 1.0;
  }
  double tv = 0.0;
  for (std::size_t b = 0; b < bins; ++b) {
    tv += std::abs(empirical[b] / static_cast<double>(ensemble.n_paths()) - target[b]);
  }
  return 0.5 * tv;
}

}  // namespace varlab
