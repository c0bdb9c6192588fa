#include "varlab/characteristics.hpp"
#include "varlab/transform.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

namespace varlab {
namespace {

Vec vec1(double a) {
  Vec v(1);
  v << a;
  return v;
}

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

ProcessSamples state_process(const PathEnsemble& e, std::span<const std::size_t> steps) {
  return sample_process(e, e.dim(), [](const PathPrefix& p) { return Vec(p.current()); }, steps);
}

TEST(MartingaleTest, BrownianPasses) {
  const auto e = simulate(models::brownian(2, zero_vec(2)), TimeGrid(50), 20000, 1);
  const auto probes = default_probe_steps(e);
  const auto r = martingale_test(state_process(e, probes), e);
  EXPECT_TRUE(r.passed) << r.max_abs_statistic;
  EXPECT_EQ(r.statistics.size(), 10u * 2u * 5u);
  EXPECT_EQ(r.test_functions.size(), 5u);
}

TEST(MartingaleTest, SquareOfBrownianFails) {
  const auto e = simulate(models::brownian(1, zero_vec(1)), TimeGrid(100), 20000, 2);
  const auto probes = default_probe_steps(e);
  const auto x = sample_process(
      e, 1, [](const PathPrefix& p) { return Vec(p.current().array().square()); }, probes);
  MartingaleTestOptions opts;
  opts.test_functions = std::vector<TestFunction>{{"1", [](const PathPrefix&) { return 1.0; }, false}};
  const auto r = martingale_test(x, e, opts);
  EXPECT_FALSE(r.passed);
  // Increment mean t - s = 0.8 over (0.1, 0.9); sd of W_t^2 - W_s^2 is below 1.5.
  EXPECT_GT(r.max_abs_statistic, 0.8 * std::sqrt(20000.0) / 1.5);
}

TEST(MartingaleTest, BridgeDriftIsMartingale) {
  const auto e = simulate(models::pinned_brownian(vec1(0.0), vec1(1.0)), TimeGrid(100), 20000, 3);
  const std::vector<double> fractions{0.0, 0.2, 0.45, 0.7, 0.9};
  std::vector<std::size_t> probes;
  for (double f : fractions) probes.push_back(e.grid().index_of(f));
  const auto x = sample_process(
      e, 1, [](const PathPrefix& p) { return Vec((1.0 - p.current().array()) / (1.0 - p.time())); },
      probes);
  EXPECT_TRUE(martingale_test(x, e).passed);
}

TEST(MartingaleTest, ThresholdMonotoneAndCsv) {
  const auto e = simulate(models::brownian_with_drift_t(1), TimeGrid(50), 2000, 4);
  const auto probes = default_probe_steps(e);
  const auto r = martingale_test(state_process(e, probes), e);
  for (double t : {0.5, 1.0, 2.0, 4.0, 8.0, 1e3}) {
    if (r.passes_at(t)) {
      EXPECT_TRUE(r.passes_at(t * 1.5));
    }
  }
  EXPECT_EQ(r.passed, r.max_abs_statistic <= r.threshold);
  std::ostringstream os;
  write_report_csv(r, os);
  EXPECT_EQ(os.str().rfind("s_time,t_time,coordinate,test_function,mean,std_error,z\n", 0), 0u);
}

TEST(MartingaleTest, Preconditions) {
  const auto small = simulate(models::brownian(1, zero_vec(1)), TimeGrid(10), 999, 1);
  const std::vector<std::size_t> probes{1, 5};
  EXPECT_THROW(martingale_test(state_process(small, probes), small), PreconditionError);
  const auto a = simulate(models::brownian(1, zero_vec(1)), TimeGrid(10), 1000, 1);
  const auto b = simulate(models::brownian(1, zero_vec(1)), TimeGrid(10), 1000, 1);
  EXPECT_THROW(martingale_test(state_process(a, probes), b), BindingError);
}

TEST(PushShift, ZeroEpsilonIsIdentity) {
  const auto e = simulate(models::brownian(1, zero_vec(1)), TimeGrid(20), 30, 1);
  const auto out = push_shift(e, materialize(shifts::state(1), e), 0.0);
  EXPECT_EQ(out.states_data(), e.states_data());
  EXPECT_EQ(out.drifts_data(), e.drifts_data());
  EXPECT_EQ(out.diffusions_data(), e.diffusions_data());
}

TEST(PushShift, ConstantShiftDriftRecovered) {
  const auto e = simulate(models::brownian(1, zero_vec(1)), TimeGrid(50), 20000, 5);
  const double eps = 0.3;
  const auto out = push_shift(e, materialize(shifts::constant(vec1(2.0)), e), eps);
  for (std::size_t j = 0; j <= 50; ++j) {
    EXPECT_NEAR(out.state(7, j)(0) - e.state(7, j)(0), eps * 2.0 * e.grid().time(j), 1e-14);
  }
  const std::vector<std::size_t> probes{10, 25, 40};
  for (const auto& est : estimate_characteristics(out, features::constant(), probes)) {
    EXPECT_LT(std::abs(est.drift.coefficients(0, 0) - 0.6), 4.0 * est.drift.std_errors(0, 0));
  }
}

TEST(PushShift, EndpointZeroShiftPreservesEndpoints) {
  const auto e = simulate(models::brownian(2, vec2(0.5, -0.5)), TimeGrid(64), 100, 6);
  const auto u = endpoint_rn(materialize(shifts::sine_state(2), e), 8);
  const auto out = push_shift(e, u, 0.7);
  for (std::size_t i = 0; i < 100; ++i) {
    EXPECT_EQ(out.state(i, 0), e.state(i, 0));
    EXPECT_EQ(out.state(i, 64), e.state(i, 64));
  }
}

TEST(PushShift, DeterministicCompositionAdds) {
  const auto e = simulate(models::brownian(1, zero_vec(1)), TimeGrid(32), 50, 7);
  const auto shift = shifts::cosine(vec1(1.0), 2);
  const auto once = push_shift(e, materialize(shift, e), 0.5);
  const auto twice = push_shift(once, materialize(shift, once), 0.25);
  const auto direct = push_shift(e, materialize(shift, e), 0.75);
  for (std::size_t k = 0; k < direct.states_data().size(); ++k) {
    EXPECT_NEAR(twice.states_data()[k], direct.states_data()[k], 1e-14);
  }
  for (std::size_t k = 0; k < direct.drifts_data().size(); ++k) {
    EXPECT_NEAR(twice.drifts_data()[k], direct.drifts_data()[k], 1e-14);
  }
}

TEST(PushShift, BindingChecked) {
  const auto a = simulate(models::brownian(1, zero_vec(1)), TimeGrid(8), 4, 1);
  const auto b = simulate(models::brownian(1, zero_vec(1)), TimeGrid(8), 4, 1);
  EXPECT_THROW(push_shift(b, materialize(shifts::state(1), a), 1.0), BindingError);
}

TEST(Lift, IdentityIsNoOp) {
  const auto e = simulate(models::brownian(2, zero_vec(2)), TimeGrid(16), 20, 1);
  const auto out = lift(e, maps::identity(2));
  EXPECT_EQ(out.states_data(), e.states_data());
  EXPECT_EQ(out.drifts_data(), e.drifts_data());
  EXPECT_EQ(out.diffusions_data(), e.diffusions_data());
}

TEST(Lift, AffineTransformsCharacteristicsExactly) {
  Mat a(2, 2);
  a << 2.0, 1.0, -0.5, 1.5;
  const auto e = simulate(models::pinned_brownian(vec2(0, 0), vec2(1, 2)), TimeGrid(16), 10, 2);
  const auto out = lift(e, maps::affine(a, vec2(3.0, -1.0)));
  for (std::size_t i = 0; i < 10; ++i) {
    for (std::size_t j = 0; j < e.steps(); ++j) {
      EXPECT_LT((Vec(out.drift(i, j)) - a * Vec(e.drift(i, j))).cwiseAbs().maxCoeff(), 1e-13);
      EXPECT_LT((out.alpha(i, j) - a * e.alpha(i, j) * a.transpose()).cwiseAbs().maxCoeff(), 1e-13);
    }
  }
}

TEST(Lift, SineWarpDriftMatchesIto) {
  const auto e = simulate(models::brownian(1, zero_vec(1)), TimeGrid(50), 20000, 3);
  const auto map = maps::sine_warp(1, 0.2);
  const auto out = lift(e, map);
  for (std::size_t i = 0; i < 50; ++i) {
    for (std::size_t j = 0; j < 50; ++j) {
      EXPECT_NEAR(out.drift(i, j)(0), -0.1 * std::sin(e.state(i, j)(0)), 1e-15);
    }
  }
  const std::vector<std::size_t> probes{10, 25, 40};
  for (const auto& chk : check_recorded_characteristics(out, features::quadratic(1, false), probes)) {
    EXPECT_LT(chk.max_drift_z, 4.0);
    EXPECT_LT(chk.max_alpha_z, 4.0);
  }
  std::vector<std::pair<double, Vec>> pts;
  for (double x = -5; x <= 5; x += 0.25) pts.push_back({0.0, vec1(x)});
  EXPECT_LT(inverse_defect(map, pts), 1e-8);
}

TEST(Lift, AffineCommutesWithDeterministicShift) {
  Mat a(1, 1);
  a << -1.5;
  const Vec b = vec1(0.25);
  const auto e = simulate(models::brownian(1, zero_vec(1)), TimeGrid(20), 40, 4);
  const auto shift = shifts::cosine(vec1(1.0), 1);
  const auto left = lift(push_shift(e, materialize(shift, e), 0.4), maps::affine(a, b));
  const auto lifted = lift(e, maps::affine(a, b));
  const auto right = push_shift(lifted, materialize(shifts::cosine(vec1(-1.5), 1), lifted), 0.4);
  for (std::size_t k = 0; k < left.states_data().size(); ++k) {
    EXPECT_NEAR(left.states_data()[k], right.states_data()[k], 1e-13);
  }
  for (std::size_t k = 0; k < left.drifts_data().size(); ++k) {
    EXPECT_NEAR(left.drifts_data()[k], right.drifts_data()[k], 1e-13);
  }
}

TEST(Lift, TimeScalingMatchesRegression) {
  // Increments see the scale at t_{j+1}: alpha is biased by about 2 rate dt.
  const auto e = simulate(models::brownian(2, zero_vec(2)), TimeGrid(100), 20000, 8);
  const auto out = lift(e, maps::time_scaling(2, 0.25));
  const std::vector<std::size_t> probes{20, 50, 80};
  for (const auto& chk : check_recorded_characteristics(out, features::affine(2), probes)) {
    EXPECT_LT(chk.max_drift_z, 4.0);
    EXPECT_LT(chk.max_alpha_z, 4.0);
  }
}

TEST(HarmonicCheck, ClassicalCases) {
  const auto e = simulate(models::brownian(1, zero_vec(1)), TimeGrid(100), 20000, 9);
  const auto probes = default_probe_steps(e);
  const auto id = harmonic_check(e, maps::identity(1), probes);
  EXPECT_TRUE(id.residual_zero);
  EXPECT_TRUE(id.martingale.passed);
  EXPECT_TRUE(id.agree);
  const auto heat = harmonic_check(e, maps::heat_square(), probes);
  EXPECT_EQ(heat.max_abs_residual, 0.0);
  EXPECT_TRUE(heat.martingale.passed) << heat.martingale.max_abs_statistic;
  EXPECT_TRUE(heat.agree);
  const auto sq = harmonic_check(e, maps::square(), probes);
  EXPECT_EQ(sq.max_abs_residual, 1.0);
  EXPECT_EQ(sq.mean_abs_residual, 1.0);
  EXPECT_FALSE(sq.martingale.passed);
  EXPECT_TRUE(sq.agree);
}

}  // namespace
}  // namespace varlab
