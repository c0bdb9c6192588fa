#include "varlab/lagrangian.hpp"
#include "varlab/model.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace varlab {
namespace {

// ln 2 + digamma(3/2) = E[Z^2 ln Z^2], Z standard normal (tests/oracles/closed_forms.py).
constexpr double kEntropicAction = 0.7296371545385218;

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

TEST(Action, BrownianKineticIsZero) {
  const auto e = simulate(models::brownian(2, zero_vec(2)), TimeGrid(20), 50, 1);
  const auto a = action(e, lagrangians::kinetic());
  EXPECT_EQ(a.mean, 0.0);
  EXPECT_EQ(a.std_error, 0.0);
  EXPECT_EQ(a.n_paths, 50u);
  EXPECT_EQ(a.grid_steps, 20u);
}

TEST(Action, DeterministicDriftIsExact) {
  const auto e = simulate(models::constant_drift(vec2(1.0, -2.0), zero_vec(2), 0.0),
                          TimeGrid(40), 5, 1);
  for (double horizon : {1.0, 0.5, 0.25}) {
    EXPECT_NEAR(action(e, lagrangians::kinetic(), horizon).mean, 5.0 * horizon / 2.0, 1e-14);
  }
  EXPECT_THROW(action(e, lagrangians::kinetic(), 0.0), PreconditionError);
  EXPECT_THROW(action(e, lagrangians::kinetic(), 1.5), PreconditionError);
}

TEST(Action, EntropicDensityLawMatchesDigammaOracle) {
  // Left-rectangle bias is about 1/M here; M = 1000 keeps it below 4 stderr.
  const TimeGrid g(1000);
  const auto e = simulate(models::entropic_density_sde(0.5), g, 20000, 3);
  const auto a = action(e, lagrangians::kinetic());
  EXPECT_LT(std::abs(a.mean - kEntropicAction), 4.0 * a.std_error) << a.mean << " +- " << a.std_error;
}

TEST(Action, ReweightedAndSimulatedRepresentationsAgree) {
  const TimeGrid g(100);
  const auto sde = simulate(models::entropic_density_sde(0.5), g, 40000, 4);
  const auto base = simulate(models::brownian(1, zero_vec(1)), g, 40000, 5);
  const auto weighted =
      reweight(base, models::entropic_density(0.5, g), models::entropic_density_sde(0.5));
  const auto a = action(sde, lagrangians::kinetic());
  const auto b = action(weighted, lagrangians::kinetic());
  EXPECT_LT(std::abs(a.mean - b.mean), 4.0 * std::hypot(a.std_error, b.std_error));
}

TEST(Action, LinearInLagrangian) {
  const auto e = simulate(models::entropic_density_sde(0.5), TimeGrid(20), 300, 6);
  const auto l1 = lagrangians::kinetic();
  const auto l2 = lagrangians::with_potential(potentials::quadratic());
  const double lambda = -0.75;
  const auto combined = action(e, linear_combination(1.0, l1, lambda, l2)).mean;
  const auto separate = action(e, l1).mean + lambda * action(e, l2).mean;
  EXPECT_NEAR(combined, separate, 1e-13);
}

TEST(GradCheck, RegistryLagrangians) {
  const std::vector<double> eps{1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  for (std::size_t d : {1u, 2u, 3u}) {
    const auto pts = sample_grad_points(d, 2.0, 25, 7);
    EXPECT_LT(grad_check(lagrangians::kinetic(), pts, eps).max_error_v, 1e-8);
    EXPECT_LT(grad_check(lagrangians::with_potential(potentials::quadratic()), pts, eps).max_error_x,
              1e-8);
    EXPECT_LT(grad_check(lagrangians::with_potential(potentials::coordinate_square(0.5)), pts, eps)
                  .worst(),
              1e-8);
    EXPECT_LT(grad_check(lagrangians::trace_weighted(), pts, eps).max_error_a, 1e-7);
    EXPECT_LT(grad_check(lagrangians::trace_weighted(), pts, eps).worst(), 1e-7);
    EXPECT_LT(grad_check(lagrangians::with_potential_and_trace(potentials::quadratic(), 0.3), pts, eps)
                  .worst(),
              1e-8);
  }
}

TEST(GradCheck, DetectsWrongGradient) {
  auto wrong = lagrangians::kinetic();
  wrong.grad_v = [](double, const Vec&, const Vec& v, const Mat&) { return Vec(2.0 * v); };
  const auto pts = sample_grad_points(2, 2.0, 10, 1);
  EXPECT_GT(grad_check(wrong, pts, {1e-3, 1e-5}).max_error_v, 0.1);
}

TEST(ElProcess, ZeroPotentialEqualsRecordedDrift) {
  const auto e = simulate(models::pinned_brownian(vec2(0, 0), vec2(1, 1)), TimeGrid(30), 20, 2);
  const auto n = el_process(e, lagrangians::kinetic());
  for (std::size_t i = 0; i < 20; ++i) {
    for (std::size_t p = 0; p < n.steps.size(); ++p) {
      for (std::size_t c = 0; c < 2; ++c) {
        EXPECT_EQ(n.at(i, p, c), e.drift(i, n.steps[p])(static_cast<Eigen::Index>(c)));
      }
    }
  }
}

TEST(ElProcess, PotentialTermIsLeftRectangleIntegral) {
  const auto e = simulate(models::brownian(1, zero_vec(1)), TimeGrid(10), 3, 9);
  const std::vector<std::size_t> steps{0, 4, 9};
  const auto n = el_process(e, lagrangians::with_potential(potentials::quadratic()), steps);
  for (std::size_t i = 0; i < 3; ++i) {
    double integral = 0.0;
    std::size_t p = 0;
    for (std::size_t j = 0; j < 10; ++j) {
      if (p < steps.size() && steps[p] == j) {
        EXPECT_NEAR(n.at(i, p, 0), 0.0 + integral, 1e-14);
        ++p;
      }
      integral += e.state(i, j)(0) * 0.1;  // -grad_x L = grad V = x
    }
  }
}

}  // namespace
}  // namespace varlab
