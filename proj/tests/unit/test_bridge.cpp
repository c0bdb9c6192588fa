#include "varlab/diagnostics.hpp"
#include "varlab/sinkhorn.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

namespace varlab {
namespace {

// KL(N(0,2) || N(0,1)) = (1 - ln 2) / 2.
constexpr double kGaussianKl = 0.15342640972002736;

std::shared_ptr<const BridgeSolution> point_to_wide(std::size_t steps) {
  BridgeProblem problem;
  problem.nu0 = marginals::point_mass(problem.lattice, 0.0);
  problem.nu1 = marginals::gaussian(problem.lattice, 0.0, 2.0);
  return std::make_shared<const BridgeSolution>(sinkhorn_bridge(problem, TimeGrid(steps)));
}

TEST(Marginals, GaussianAndPointMassSumToOne) {
  const Lattice lat;
  const auto g = marginals::gaussian(lat, 0.5, 1.5);
  double total = 0.0;
  double mean = 0.0;
  for (std::size_t i = 0; i < lat.cells; ++i) {
    total += g[i];
    mean += g[i] * lat.center(i);
  }
  EXPECT_NEAR(total, 1.0, 1e-14);
  EXPECT_NEAR(mean, 0.5, 1e-4);
  const auto d = marginals::point_mass(lat, 0.0);
  EXPECT_EQ(d[240], 1.0);
  EXPECT_EQ(lat.center(240), 0.0);
}

TEST(Marginals, CsvRoundTripAndRejection) {
  const Lattice lat{-1.0, 1.0, 5};
  const auto dir = std::filesystem::temp_directory_path();
  const auto ok = dir / "varlab_marginal_ok.csv";
  {
    std::ofstream out(ok);
    out << "x,mass\n-1,0.25\n0,0.5\n1,0.25\n";
  }
  const auto nu = marginals::read_csv(lat, ok);
  EXPECT_EQ(nu, (std::vector<double>{0.25, 0.0, 0.5, 0.0, 0.25}));

  const auto bad_mass = dir / "varlab_marginal_mass.csv";
  {
    std::ofstream out(bad_mass);
    out << "0,0.9\n";
  }
  EXPECT_THROW(marginals::read_csv(lat, bad_mass), PreconditionError);

  const auto off_lattice = dir / "varlab_marginal_off.csv";
  {
    std::ofstream out(off_lattice);
    out << "0.2,1.0\n";
  }
  EXPECT_THROW(marginals::read_csv(lat, off_lattice), PreconditionError);
}

TEST(LatticeHeatStep, RowsAreStochasticWithUnitVariancePerTime) {
  const Lattice lat;
  const double dt = 1.0 / 200;
  const auto p = lattice_heat_step(lat, dt);
  const std::size_t mid = 240;
  double mass = 0.0;
  double var = 0.0;
  for (std::size_t j = 0; j < lat.cells; ++j) {
    mass += p(mid, j);
    var += p(mid, j) * lat.center(j) * lat.center(j);
  }
  EXPECT_NEAR(mass, 1.0, 1e-14);
  EXPECT_NEAR(var / dt, 1.0, 2e-3);
  EXPECT_THROW(lattice_heat_step(Lattice{-6, 6, 481}, 1e-6), PreconditionError);
}

TEST(Sinkhorn, FeasibleReferenceGivesUnitPotentialsAndZeroDrift) {
  BridgeProblem problem;
  const TimeGrid grid(50);
  problem.nu0 = marginals::gaussian(problem.lattice, 0.0, 1.0);
  const auto p = lattice_heat_step(problem.lattice, grid.dt());
  Eigen::VectorXd nu = Eigen::Map<const Eigen::VectorXd>(problem.nu0.data(), problem.lattice.cells);
  for (std::size_t j = 0; j < grid.steps(); ++j) nu = (p.transpose() * nu).eval();
  nu /= nu.sum();
  problem.nu1.assign(nu.data(), nu.data() + nu.size());

  const auto s = sinkhorn_bridge(problem, grid);
  EXPECT_LE(s.iterations, 3U);
  for (std::size_t i = 0; i < problem.lattice.cells; ++i) {
    EXPECT_NEAR(s.log_phi0[i], 0.0, 1e-9);
    EXPECT_NEAR(s.log_phi1[i], 0.0, 1e-9);
  }
  for (double v : s.drift) EXPECT_NEAR(v, 0.0, 1e-7);
  EXPECT_NEAR(s.entropy, 0.0, 1e-10);
}

TEST(Sinkhorn, PointToGaussianMatchesKlOracle) {
  const auto s = point_to_wide(200);
  EXPECT_NEAR(s->entropy, kGaussianKl, 2e-3);
  EXPECT_LT(s->harmonic_defect, 1e-10);
  EXPECT_LT(s->marginal_errors.back(), 1e-9);
}

TEST(Sinkhorn, DriftMatchesClosedFormInTheBulk) {
  // Optimal drift from delta_0 to N(0,2) is x / (1 + t); X_t ~ N(0, t (1 + t)).
  const auto s = point_to_wide(200);
  for (std::size_t j : {0UL, 20UL, 100UL, 199UL}) {
    const double t = s->grid.time(j);
    const double sd = std::max(std::sqrt(t * (1.0 + t)), 0.1);
    for (double z : {-2.0, -0.5, 0.5, 2.0}) {
      const std::size_t i = s->lattice.nearest(z * sd);
      EXPECT_NEAR(s->drift_at(j, i), s->lattice.center(i) / (1.0 + t), 2e-2) << t << " " << z;
    }
  }
}

TEST(Sinkhorn, MarginalErrorsDecreaseMonotonically) {
  BridgeProblem problem;
  problem.nu0 = marginals::gaussian(problem.lattice, -1.0, 0.5);
  problem.nu1 = marginals::gaussian(problem.lattice, 1.5, 0.3);
  const auto s = sinkhorn_bridge(problem, TimeGrid(100));
  ASSERT_GT(s.iterations, 2U);
  for (std::size_t k = 1; k < s.marginal_errors.size(); ++k) {
    EXPECT_LE(s.marginal_errors[k], s.marginal_errors[k - 1] * (1.0 + 1e-12)) << k;
  }
  EXPECT_LT(s.harmonic_defect, 1e-10);
  EXPECT_GT(s.entropy, 0.0);
}

TEST(Sinkhorn, Errors) {
  BridgeProblem wide;
  wide.lattice = Lattice{-60.0, 60.0, 481};
  wide.nu0 = marginals::point_mass(wide.lattice, 0.0);
  wide.nu1 = marginals::gaussian(wide.lattice, 0.0, 2.0);
  EXPECT_THROW(sinkhorn_bridge(wide, TimeGrid(20)), ConvergenceError);

  BridgeProblem slow;
  slow.nu0 = marginals::gaussian(slow.lattice, -1.0, 0.5);
  slow.nu1 = marginals::gaussian(slow.lattice, 1.5, 0.3);
  EXPECT_THROW(sinkhorn_bridge(slow, TimeGrid(20), SinkhornOptions{1e-9, 2}), ConvergenceError);

  BridgeProblem bad;
  bad.nu0 = marginals::point_mass(bad.lattice, 0.0);
  bad.nu1 = bad.nu0;
  bad.nu1[0] = 0.5;
  EXPECT_THROW(sinkhorn_bridge(bad, TimeGrid(20)), PreconditionError);
}

TEST(BridgeModel, ZeroFieldIsBrownian) {
  auto s = std::make_shared<BridgeSolution>();
  s->grid = TimeGrid(10);
  s->nu0 = marginals::point_mass(s->lattice, 0.0);
  s->nu1 = s->nu0;
  s->drift.assign(10 * s->lattice.cells, 0.0);
  const auto m = bridge_to_model(s);
  const auto e = simulate(m.model, TimeGrid(10), 20000, 3);
  const auto b = simulate(models::brownian(1, zero_vec(1)), TimeGrid(10), 20000, 3);
  for (std::size_t p = 0; p < 100; ++p) {
    EXPECT_DOUBLE_EQ(e.state(p, 10)[0], b.state(p, 10)[0]);
  }
}

TEST(BridgeModel, ClampsOutsideLattice) {
  auto s = std::make_shared<BridgeSolution>();
  s->lattice = Lattice{-0.1, 0.1, 5};
  s->grid = TimeGrid(10);
  s->nu0 = marginals::point_mass(s->lattice, 0.0);
  s->nu1 = s->nu0;
  s->drift.assign(10 * 5, 1.0);
  const auto m = bridge_to_model(s);
  simulate(m.model, TimeGrid(10), 1000, 3);
  EXPECT_GT(m.clamped->load(), 0U);
}

TEST(BridgeModel, SimulatedBridgeHitsTargetAndCertifies) {
  const auto s = point_to_wide(200);
  const auto m = bridge_to_model(s);
  const auto e = simulate(m.model, s->grid, 100000, 11);
  EXPECT_LE(terminal_tv(e, *s, 10), 0.02);
  EXPECT_EQ(m.clamped->load(), 0U);

  const auto a = action(e, lagrangians::kinetic());
  EXPECT_LE(std::abs(a.mean - s->entropy), 4 * a.std_error + 2e-3) << a.mean;

  const auto r = el_certify(e, lagrangians::kinetic());
  EXPECT_TRUE(r.passed) << r.max_abs_statistic;
}

TEST(BridgeModel, DriftCsvHasOneRowPerCell) {
  const auto s = point_to_wide(20);
  const auto file = std::filesystem::temp_directory_path() / "varlab_drift.csv";
  write_drift_csv(*s, file);
  std::ifstream in(file);
  std::string line;
  std::size_t rows = 0;
  std::getline(in, line);
  EXPECT_EQ(line, "t,x,v");
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 20 * s->lattice.cells);
}

}  // namespace
}  // namespace varlab
