#include "varlab/scenario.hpp"

#include "varlab/characteristics.hpp"
#include "varlab/diagnostics.hpp"
#include "varlab/ensemble_io.hpp"
#include "varlab/fbsde.hpp"
#include "varlab/noether.hpp"
#include "varlab/sinkhorn.hpp"
#include "varlab/taylor_green.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

namespace varlab {

namespace {

Vec filled_vec(std::size_t dim, double value) {
  Vec v = zero_vec(dim);
  v.setConstant(value);
  return v;
}

std::string number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

double test_num(const ScenarioConfig& cfg, const std::string& key, double fallback) {
  auto it = cfg.test.find(key);
  return it == cfg.test.end() ? fallback : parse_double(it->second, "[test] " + key);
}

std::optional<double> test_opt(const ScenarioConfig& cfg, const std::string& key) {
  auto it = cfg.test.find(key);
  if (it == cfg.test.end()) return std::nullopt;
  return parse_double(it->second, "[test] " + key);
}

bool parse_bool(const std::string& text, const std::string& what) {
  if (text == "true" || text == "yes" || text == "1") return true;
  if (text == "false" || text == "no" || text == "0") return false;
  throw ConfigError(what + ": expected true or false");
}

bool test_bool(const ScenarioConfig& cfg, const std::string& key, bool fallback) {
  auto it = cfg.test.find(key);
  return it == cfg.test.end() ? fallback : parse_bool(it->second, "[test] " + key);
}

std::size_t test_count(const ScenarioConfig& cfg, const std::string& key, std::size_t fallback) {
  const double v = test_num(cfg, key, static_cast<double>(fallback));
  if (!(v >= 1.0) || v != std::floor(v)) throw ConfigError("[test] " + key + " must be a count");
  return static_cast<std::size_t>(v);
}

Potential build_potential(const ScenarioConfig& cfg) {
  return cfg.potential ? registry::potential(cfg.potential->name, cfg.potential->params)
                       : potentials::zero();
}

Lagrangian build_lagrangian(const ScenarioConfig& cfg, const Potential& V) {
  if (!cfg.lagrangian) return lagrangians::kinetic();
  return registry::lagrangian(cfg.lagrangian->name, cfg.lagrangian->params, V);
}

SimulationOptions horizon_options(const ScenarioConfig& cfg, const TimeGrid& grid,
                                  const SemimartingaleModel& model) {
  SimulationOptions opts;
  if (cfg.horizon) {
    std::size_t k = grid.index_of(*cfg.horizon);
    if (model.singular_at_end) k = std::min(k, grid.steps() - 1);
    if (k == 0) throw ConfigError("[simulation] horizon is shorter than one step");
    opts.steps = k;
  }
  return opts;
}

struct BuiltLaw {
  PathEnsemble ensemble;
  std::optional<FbsdeSpec> spec;
  std::vector<double> posterior_var;
};

BuiltLaw build_law(const ScenarioConfig& cfg, const TimeGrid& grid) {
  if (cfg.fbsde) {
    FbsdeSpec spec = registry::fbsde(cfg.fbsde->name, cfg.fbsde->params);
    FbsdeResult r = fbsde_simulate(spec, grid, cfg.paths, cfg.seed);
    return BuiltLaw{std::move(r.x), spec, std::move(r.posterior_var)};
  }
  const RegistryRef ref = cfg.model.value_or(RegistryRef{"brownian", {}});
  const SemimartingaleModel model = registry::model(ref.name, ref.params);
  return BuiltLaw{simulate(model, grid, cfg.paths, cfg.seed, horizon_options(cfg, grid, model)),
                  std::nullopt, {}};
}

void add_martingale_rows(const std::string& metric, const MartingaleReport& report,
                         std::vector<ReportRow>& rows) {
  std::vector<double> time_of(report.probe_steps.empty() ? 0 : report.probe_steps.back() + 1);
  for (std::size_t p = 0; p < report.probe_steps.size(); ++p) {
    time_of[report.probe_steps[p]] = report.probe_times[p];
  }
  for (const auto& s : report.statistics) {
    rows.push_back({metric, time_of[s.t_step], s.coordinate,
                    "s=" + number(time_of[s.s_step]) + ";f=" + report.test_functions[s.test_function],
                    s.mean, s.std_error, s.z});
  }
}

MartingaleTestOptions test_options(const ScenarioConfig& cfg) {
  MartingaleTestOptions o;
  o.threshold = cfg.threshold;
  return o;
}

// ---- kinds -----------------------------------------------------------------

ScenarioResult run_simulate(const ScenarioConfig& cfg, const TimeGrid& grid) {
  BuiltLaw law = build_law(cfg, grid);
  PathEnsemble e = std::move(law.ensemble);
  if (cfg.map) {
    e = lift(e, registry::map(cfg.map->name, cfg.map->params, e.dim()));
  }
  ScenarioResult out;
  const auto probes = default_probe_steps(e);
  const auto checks = check_recorded_characteristics(e, features::quadratic(e.dim(), false), probes);
  double worst = 0.0;
  for (const auto& c : checks) {
    out.rows.push_back({"characteristics_drift", e.grid().time(c.step), 0, "max_z", c.max_drift_z, 0.0,
                        c.max_drift_z});
    out.rows.push_back({"characteristics_alpha", e.grid().time(c.step), 0, "max_z", c.max_alpha_z, 0.0,
                        c.max_alpha_z});
    worst = std::max({worst, c.max_drift_z, c.max_alpha_z});
  }
  if (test_bool(cfg, "martingale", true)) {
    const auto x = sample_process(
        e, e.dim(), [](const PathPrefix& p) { return Vec(p.current()); }, probes);
    const auto report = martingale_test(x, e, test_options(cfg));
    add_martingale_rows("state_martingale", report, out.rows);
    worst = std::max(worst, report.max_abs_statistic);
  }
  out.max_stat = worst;
  out.passed = worst <= cfg.threshold;
  out.ensemble = std::move(e);
  return out;
}

ScenarioResult run_action(const ScenarioConfig& cfg, const TimeGrid& grid) {
  BuiltLaw law = build_law(cfg, grid);
  const Lagrangian L = build_lagrangian(cfg, build_potential(cfg));
  const auto a = action(law.ensemble, L, cfg.horizon.value_or(1.0));
  ScenarioResult out;
  const auto expected = test_opt(cfg, "expected");
  if (!expected) throw ConfigError("action scenario needs [test] expected");
  const double allowance = test_num(cfg, "allowance", 0.0);
  const double excess = std::max(0.0, std::abs(a.mean - *expected) - allowance);
  const double stat = excess / std::max(a.std_error, kStatisticSeFloor);
  out.rows.push_back({"action", law.ensemble.horizon(), 0, L.name, a.mean, a.std_error,
                      (a.mean - *expected) / std::max(a.std_error, kStatisticSeFloor)});
  out.rows.push_back({"expected", law.ensemble.horizon(), 0, "allowance=" + number(allowance),
                      *expected, 0.0, stat});
  out.max_stat = stat;
  out.passed = stat <= cfg.threshold;
  out.ensemble = std::move(law.ensemble);
  return out;
}

ScenarioResult certify_view(const ScenarioConfig& cfg, const PathEnsemble& e, const Lagrangian& L) {
  ScenarioResult out;
  const auto report = el_certify(e, L, {}, test_options(cfg));
  add_martingale_rows("el_certify", report, out.rows);
  out.max_stat = report.max_abs_statistic;
  out.passed = report.passed;
  return out;
}

ScenarioResult certify(const ScenarioConfig& cfg, PathEnsemble e, const Lagrangian& L) {
  ScenarioResult out = certify_view(cfg, e, L);
  out.ensemble = std::move(e);
  return out;
}

ScenarioResult run_el_certify(const ScenarioConfig& cfg, const TimeGrid& grid) {
  BuiltLaw law = build_law(cfg, grid);
  return certify(cfg, std::move(law.ensemble), build_lagrangian(cfg, build_potential(cfg)));
}

MaterializedShift build_shift(const ScenarioConfig& cfg, const PathEnsemble& e) {
  if (!cfg.shift) throw ConfigError("scenario needs a [shift] section");
  Params params = cfg.shift->params;
  std::string projection = "none";
  std::size_t n = 8;
  if (auto it = params.find("projection"); it != params.end()) {
    projection = it->second;
    params.erase(it);
  }
  if (auto it = params.find("n"); it != params.end()) {
    n = static_cast<std::size_t>(parse_double(it->second, "[shift] n"));
    params.erase(it);
  }
  auto u = materialize(registry::shift(cfg.shift->name, params, e.dim()), e);
  if (projection == "rn") return endpoint_rn(u, n);
  if (projection == "pn") return delay_pn(u, n);
  if (projection != "none") throw ConfigError("[shift] projection must be none, pn or rn");
  return u;
}

ScenarioResult run_variational(const ScenarioConfig& cfg, const TimeGrid& grid) {
  BuiltLaw law = build_law(cfg, grid);
  const Lagrangian L = build_lagrangian(cfg, build_potential(cfg));
  const auto h = build_shift(cfg, law.ensemble);
  const auto allowance = test_opt(cfg, "allowance");
  const auto d = variational_derivative(law.ensemble, L, h, {1e-1, 1e-2, 1e-3}, allowance);

  ScenarioResult out;
  const double agree_stat = d.tolerance > 0 ? cfg.threshold * std::abs(d.fd - d.formula) / d.tolerance
                                            : (d.fd == d.formula ? 0.0 : HUGE_VAL);
  out.rows.push_back({"fd", 1.0, 0, "eps=" + number(d.epsilon), d.fd, d.fd_std_error,
                      d.fd / std::max(d.fd_std_error, kStatisticSeFloor)});
  out.rows.push_back({"formula", 1.0, 0, L.name, d.formula, d.formula_std_error,
                      d.formula / std::max(d.formula_std_error, kStatisticSeFloor)});
  out.rows.push_back({"agreement", 1.0, 0, "tolerance", d.tolerance, 0.0, agree_stat});
  double stat = agree_stat;
  bool passed = d.agree;
  if (test_bool(cfg, "expect_critical", false)) {
    const double crit = std::abs(d.formula) / std::max(d.formula_std_error, kStatisticSeFloor);
    out.rows.push_back({"criticality", 1.0, 0, "formula_z", d.formula, d.formula_std_error, crit});
    stat = std::max(stat, crit);
    passed = passed && crit <= cfg.threshold;
  }
  out.max_stat = stat;
  out.passed = passed;
  out.ensemble = std::move(law.ensemble);
  return out;
}

ScenarioResult run_noether(const ScenarioConfig& cfg, const TimeGrid& grid) {
  BuiltLaw law = build_law(cfg, grid);
  const Lagrangian L = build_lagrangian(cfg, build_potential(cfg));
  if (!cfg.family) throw ConfigError("noether scenario needs a [family] section");
  const auto fam = registry::family(cfg.family->name, cfg.family->params, law.ensemble.dim());
  const auto r = noether_invariant(law.ensemble, L, fam, {}, test_options(cfg));
  ScenarioResult out;
  add_martingale_rows("noether_" + fam.name, r.martingale, out.rows);
  out.max_stat = r.martingale.max_abs_statistic;
  out.passed = r.martingale.passed;
  out.ensemble = std::move(law.ensemble);
  return out;
}

std::vector<double> bridge_marginal(const ScenarioConfig& cfg, const Lattice& lat,
                                    const std::string& key) {
  auto it = cfg.bridge.find(key);
  if (it == cfg.bridge.end()) throw ConfigError("[bridge] " + key + " is required");
  const std::string spec = it->second;
  const auto colon = spec.find(':');
  const std::string type = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  const std::string what = "[bridge] " + key;
  if (type == "point") return marginals::point_mass(lat, parse_double(arg, what));
  if (type == "normal") {
    const auto v = parse_numbers(arg, what);
    if (v.size() != 2) throw ConfigError(what + ": normal:MEAN,VARIANCE");
    return marginals::gaussian(lat, v[0], v[1]);
  }
  if (type == "file") {
    std::filesystem::path p = arg;
    if (p.is_relative()) p = cfg.base_dir / p;
    return marginals::read_csv(lat, p);
  }
  throw ConfigError(what + " must be point:X, normal:MEAN,VAR or file:PATH");
}

ScenarioResult run_bridge(const ScenarioConfig& cfg, const TimeGrid& grid) {
  auto num = [&](const std::string& key, double fallback) {
    auto it = cfg.bridge.find(key);
    return it == cfg.bridge.end() ? fallback : parse_double(it->second, "[bridge] " + key);
  };
  BridgeProblem problem;
  problem.lattice.x_min = num("x_min", -6.0);
  problem.lattice.x_max = num("x_max", 6.0);
  problem.lattice.cells = static_cast<std::size_t>(num("cells", 481));
  problem.nu0 = bridge_marginal(cfg, problem.lattice, "nu0");
  problem.nu1 = bridge_marginal(cfg, problem.lattice, "nu1");
  SinkhornOptions sopt;
  sopt.tol = num("tol", sopt.tol);
  sopt.max_iter = static_cast<std::size_t>(num("max_iter", static_cast<double>(sopt.max_iter)));

  auto solution = std::make_shared<const BridgeSolution>(sinkhorn_bridge(problem, grid, sopt));
  const auto model = bridge_to_model(solution);
  PathEnsemble e = simulate(model.model, grid, cfg.paths, cfg.seed);

  const ScenarioResult cert = certify_view(cfg, e, build_lagrangian(cfg, build_potential(cfg)));
  ScenarioResult out;
  out.rows.push_back({"entropy", 1.0, 0, "sinkhorn", solution->entropy, 0.0, 0.0});
  out.rows.push_back({"sinkhorn_iterations", 1.0, 0, "tv=" + number(solution->marginal_errors.back()),
                      static_cast<double>(solution->iterations), 0.0, 0.0});
  out.rows.push_back({"harmonic_defect", 1.0, 0, "max_rel", solution->harmonic_defect, 0.0, 0.0});

  const auto a = action(e, lagrangians::kinetic());
  const double expected = test_num(cfg, "expected", solution->entropy);
  const double allowance = test_num(cfg, "allowance", 2e-3);
  const double action_stat = std::max(0.0, std::abs(a.mean - expected) - allowance) /
                             std::max(a.std_error, kStatisticSeFloor);
  out.rows.push_back({"action", 1.0, 0, "expected=" + number(expected), a.mean, a.std_error,
                      action_stat});

  const double tv = terminal_tv(e, *solution, test_count(cfg, "tv_bin_cells", 10));
  const double tv_max = test_num(cfg, "tv_max", 0.02);
  out.rows.push_back({"terminal_tv", 1.0, 0, "max=" + number(tv_max), tv, 0.0, 0.0});
  out.rows.push_back({"clamped_queries", 1.0, 0, "count",
                      static_cast<double>(model.clamped->load()), 0.0, 0.0});
  out.rows.insert(out.rows.end(), cert.rows.begin(), cert.rows.end());

  out.max_stat = std::max(cert.max_stat, action_stat);
  out.passed = cert.passed && action_stat <= cfg.threshold && tv <= tv_max &&
               solution->harmonic_defect < 1e-10;

  std::ostringstream drift;
  write_drift_csv(*solution, drift);
  out.artifacts.emplace_back("drift.csv", drift.str());
  out.ensemble = std::move(e);
  return out;
}

ScenarioResult run_fbsde(const ScenarioConfig& cfg, const TimeGrid& grid) {
  if (!cfg.fbsde) throw ConfigError("fbsde scenario needs an [fbsde] section");
  BuiltLaw law = build_law(cfg, grid);
  const Lagrangian L = build_lagrangian(cfg, build_potential(cfg));
  std::vector<ReportRow> extra;
  bool ok = true;
  if (law.spec->variant == FbsdeSpec::Variant::kFiltering) {
    const auto& s = *law.spec;
    const auto ref = riccati_variance(s.y0_var, s.sigma(0, 0), s.z_scale, grid,
                                      law.posterior_var.size());
    double worst = 0.0;
    for (std::size_t j = 0; j < ref.size(); ++j) {
      worst = std::max(worst, std::abs(ref[j] - law.posterior_var[j]));
    }
    const double tol = test_num(cfg, "riccati_tol", 1e-8);
    extra.push_back({"riccati_defect", 1.0, 0, "max_abs", worst, 0.0, 0.0});
    ok = worst <= tol;
  } else {
    const auto n = el_process(law.ensemble, L);
    double spread = 0.0;
    for (std::size_t i = 0; i < n.n_paths; ++i) {
      for (std::size_t p = 0; p < n.steps.size(); ++p) {
        for (std::size_t c = 0; c < n.dim; ++c) {
          spread = std::max(spread, std::abs(n.at(i, p, c) - n.at(i, 0, c)));
        }
      }
    }
    extra.push_back({"el_process_spread", law.ensemble.horizon(), 0, "max_abs", spread, 0.0, 0.0});
  }
  ScenarioResult out = certify(cfg, std::move(law.ensemble), L);
  out.rows.insert(out.rows.begin(), extra.begin(), extra.end());
  out.passed = out.passed && ok;
  return out;
}

ScenarioResult run_navier_stokes(const ScenarioConfig& cfg, const TimeGrid& grid) {
  const auto oracle = taylor_green::validate();
  Vec start = taylor_green::default_start();
  if (cfg.model) {
    if (cfg.model->name != "taylor_green") {
      throw ConfigError("navier-stokes scenario uses [model] name = taylor_green");
    }
    if (auto it = cfg.model->params.find("start"); it != cfg.model->params.end()) {
      start = parse_vec(it->second, "[model] start");
    }
  }
  auto law = taylor_green::simulate_law(grid, cfg.paths, cfg.seed, start);
  ScenarioResult out = certify(cfg, std::move(law.ensemble), build_lagrangian(cfg, build_potential(cfg)));
  out.rows.insert(out.rows.begin(),
                  {{"ns_residual", 1.0, 0, "max_abs", oracle.max_residual, 0.0, 0.0},
                   {"divergence", 1.0, 0, "max_abs", oracle.max_divergence, 0.0, 0.0}});
  out.passed = out.passed && oracle.max_residual < 1e-10 && oracle.max_divergence < 1e-12;
  return out;
}

/// hdot = a cos(2 pi t) + b sin(W_t) cos(2 pi t) + c W_t before a random time
/// t0 in [0.25, 0.6], then the constant -h(t0)/(1 - t0): adapted, endpoint-zero,
/// and smooth enough for r_32 to beat r_4. |a| >= 1/2 keeps the shift away
/// from zero.
MaterializedShift random_shift(const PathEnsemble& e, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::uniform_real_distribution<double> stop(0.25, 0.6);
  const double a_raw = coef(rng);
  const double a = (a_raw < 0 ? -0.5 : 0.5) + 0.5 * a_raw;
  const double b = coef(rng);
  const double c = coef(rng);
  const std::size_t j0 = e.grid().index_of(stop(rng));

  const auto cos_part = materialize(shifts::cosine(filled_vec(e.dim(), 1.0), 1), e);
  const auto sine_part = materialize(shifts::sine_state(e.dim()), e);
  const auto state_part = materialize(shifts::state(e.dim()), e);
  MaterializedShift u = combine(1.0, combine(a, cos_part, b, sine_part), c, state_part);
  const double remaining = u.horizon() - e.grid().time(j0);
  for (std::size_t i = 0; i < u.n_paths(); ++i) {
    const Vec slope = -Vec(u.h(i, j0)) / remaining;
    for (std::size_t j = j0; j < u.steps(); ++j) u.hdot(i, j) = slope;
  }
  u.integrate(true);
  return u;
}

ScenarioResult run_operators(const ScenarioConfig& cfg, const TimeGrid& grid) {
  BuiltLaw law = build_law(cfg, grid);
  const PathEnsemble& e = law.ensemble;
  const std::size_t count = test_count(cfg, "shifts", 20);
  const std::size_t n_small = test_count(cfg, "n_small", 4);
  const std::size_t n_large = test_count(cfg, "n_large", 32);
  const double level = test_num(cfg, "level", 0.5);
  constexpr double kSlack = 1e-12;

  std::mt19937_64 rng(cfg.seed);
  ScenarioResult out;
  bool passed = true;
  double worst_ratio = 0.0;
  for (std::size_t s = 0; s < count; ++s) {
    const auto u = random_shift(e, rng);
    const auto pn = delay_pn(u, n_large);
    const auto kt = stop_truncate(u, level);
    const auto r_small = endpoint_rn(u, n_small);
    const auto r_large = endpoint_rn(u, n_large);
    const auto diff_small = combine(1.0, r_small, -1.0, u);
    const auto diff_large = combine(1.0, r_large, -1.0, u);

    double pn_ratio = 0.0;
    double kt_ratio = 0.0;
    double d_small = 0.0;
    double d_large = 0.0;
    for (std::size_t i = 0; i < e.n_paths(); ++i) {
      const double norm = std::sqrt(u.h_norm_sq(i));
      if (norm > 0.0) {
        pn_ratio = std::max(pn_ratio, std::sqrt(pn.h_norm_sq(i)) / norm);
        kt_ratio = std::max(kt_ratio, std::sqrt(kt.h_norm_sq(i)) / norm);
      }
      d_small += diff_small.h_norm_sq(i);
      d_large += diff_large.h_norm_sq(i);
    }
    d_small /= static_cast<double>(e.n_paths());
    d_large /= static_cast<double>(e.n_paths());
    const double endpoint = std::max(r_small.max_endpoint(), r_large.max_endpoint());
    const std::string label = "shift=" + std::to_string(s);
    out.rows.push_back({"pn_contraction", 1.0, 0, label, pn_ratio, 0.0, 0.0});
    out.rows.push_back({"stop_contraction", 1.0, 0, label, kt_ratio, 0.0, 0.0});
    out.rows.push_back({"rn_endpoint", 1.0, 0, label, endpoint, 0.0, 0.0});
    out.rows.push_back({"rn_distance", 1.0, 0, label + ";n=" + std::to_string(n_small), d_small,
                        0.0, 0.0});
    out.rows.push_back({"rn_distance", 1.0, 0, label + ";n=" + std::to_string(n_large), d_large,
                        0.0, d_small > 0 ? d_large / d_small : 0.0});
    passed = passed && pn_ratio <= 1.0 + kSlack && kt_ratio <= 1.0 + kSlack && endpoint == 0.0 &&
             d_large < d_small;
    worst_ratio = std::max({worst_ratio, pn_ratio, kt_ratio, d_small > 0 ? d_large / d_small : 0.0});
  }
  out.max_stat = worst_ratio;
  out.passed = passed;
  out.ensemble = std::move(law.ensemble);
  return out;
}

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& cfg) {
  const TimeGrid grid(cfg.steps);
  ScenarioResult out;
  switch (cfg.kind) {
    case ScenarioKind::kSimulate: out = run_simulate(cfg, grid); break;
    case ScenarioKind::kAction: out = run_action(cfg, grid); break;
    case ScenarioKind::kElCertify: out = run_el_certify(cfg, grid); break;
    case ScenarioKind::kVariational: out = run_variational(cfg, grid); break;
    case ScenarioKind::kNoether: out = run_noether(cfg, grid); break;
    case ScenarioKind::kBridge: out = run_bridge(cfg, grid); break;
    case ScenarioKind::kFbsde: out = run_fbsde(cfg, grid); break;
    case ScenarioKind::kNavierStokes: out = run_navier_stokes(cfg, grid); break;
    case ScenarioKind::kOperators: out = run_operators(cfg, grid); break;
  }
  out.name = cfg.name;
  out.kind = cfg.kind;
  return out;
}

std::string report_csv(const ScenarioResult& result) {
  std::ostringstream os;
  os << "metric,time,coordinate,label,value,std_error,statistic\n";
  for (const auto& r : result.rows) {
    os << r.metric << ',' << number(r.time) << ',' << r.coordinate << ',' << r.label << ','
       << number(r.value) << ',' << number(r.std_error) << ',' << number(r.statistic) << '\n';
  }
  return os.str();
}

std::string verdict_line(const ScenarioResult& result) {
  return result.name + (result.passed ? " PASS" : " FAIL") + " max_stat=" + number(result.max_stat);
}

void write_outputs(const ScenarioConfig& config, const ScenarioResult& result,
                   const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream out(out_dir / name, std::ios::binary);
    if (!out) throw Error("cannot write " + (out_dir / name).string());
    out << text;
  };
  write("report.csv", report_csv(result));
  write("verdict.txt", verdict_line(result) + "\n");
  for (const auto& [name, text] : result.artifacts) write(name, text);
  if (config.sample_paths > 0 && result.ensemble) {
    const std::size_t n = std::min(config.sample_paths, result.ensemble->n_paths());
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    write_paths_csv(*result.ensemble, idx, out_dir / "paths.csv");
  }
}

}  // namespace varlab
