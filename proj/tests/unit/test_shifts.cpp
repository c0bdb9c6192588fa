#include "varlab/shifts.hpp"

#include <gtest/gtest.h>

#include <cmath>

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

PathEnsemble still_paths(std::size_t m, std::size_t n = 1, std::size_t dim = 1) {
  return simulate(models::constant_drift(zero_vec(dim), zero_vec(dim), 0.0), TimeGrid(m), n, 0);
}

AdaptedShift table_shift(std::vector<double> values) {
  return {"table", 1, [values](const PathPrefix& p) { return vec1(values.at(p.step())); }};
}

TEST(Materialize, ConstantDerivativeGivesLinearPath) {
  const auto e = simulate(models::brownian(2, zero_vec(2)), TimeGrid(10), 4, 3);
  const auto u = materialize(shifts::constant(vec2(1, 0)), e);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(u.h(i, 0)(0), 0.0);
    for (std::size_t j = 0; j <= 10; ++j) {
      EXPECT_NEAR(u.h(i, j)(0), e.grid().time(j), 1e-15);
      EXPECT_EQ(u.h(i, j)(1), 0.0);
    }
  }
}

TEST(Materialize, StateDerivativeIsPathIntegral) {
  const auto e = simulate(models::brownian(1, vec1(0.3)), TimeGrid(3), 1, 17);
  const auto u = materialize(shifts::state(1), e);
  const double dt = 1.0 / 3.0;
  const double w0 = e.state(0, 0)(0), w1 = e.state(0, 1)(0), w2 = e.state(0, 2)(0);
  EXPECT_DOUBLE_EQ(u.h(0, 1)(0), w0 * dt);
  EXPECT_DOUBLE_EQ(u.h(0, 2)(0), w0 * dt + w1 * dt);
  EXPECT_DOUBLE_EQ(u.h(0, 3)(0), w0 * dt + w1 * dt + w2 * dt);
}

TEST(Materialize, PeekingShiftIsRejected) {
  const auto e = simulate(models::brownian(1, zero_vec(1)), TimeGrid(8), 2, 1);
  const AdaptedShift peek{"peek", 1, [](const PathPrefix& p) { return Vec(p.at(p.step() + 1)); }};
  EXPECT_THROW(materialize(peek, e), std::out_of_range);
  EXPECT_FALSE(probe_adaptedness(peek.derivative, 1, TimeGrid(8), 3).adapted);
}

TEST(HInner, DeterministicCases) {
  const auto e = simulate(models::brownian(2, zero_vec(2)), TimeGrid(64), 10, 1);
  const auto u1 = materialize(shifts::constant(vec2(1, 0)), e);
  const auto u2 = materialize(shifts::constant(vec2(0, 1)), e);
  const auto same = h_inner(e, u1, u1);
  EXPECT_NEAR(same.mean, 1.0, 1e-15);
  EXPECT_EQ(same.std_error, 0.0);
  EXPECT_EQ(h_inner(e, u1, u2).mean, 0.0);
}

TEST(HInner, BrownianSquareIntegral) {
  const auto e = simulate(models::brownian(1, zero_vec(1)), TimeGrid(400), 20000, 21);
  const auto u = materialize(shifts::state(1), e);
  const auto r = h_inner(e, u, u);
  EXPECT_LT(std::abs(r.mean - 0.5), 4.0 * r.std_error);
}

TEST(HInner, BindingMismatchRejected) {
  const auto a = simulate(models::brownian(1, zero_vec(1)), TimeGrid(8), 4, 1);
  const auto b = simulate(models::brownian(1, zero_vec(1)), TimeGrid(8), 4, 1);
  const auto u = materialize(shifts::state(1), a);
  EXPECT_THROW(h_inner(b, u, u), BindingError);
}

TEST(DelayPn, VanishesBeforeTwoOverN) {
  const auto e = simulate(models::brownian(1, zero_vec(1)), TimeGrid(64), 20, 2);
  const auto p = delay_pn(materialize(shifts::state(1), e), 8);
  for (std::size_t i = 0; i < 20; ++i) {
    for (std::size_t j = 0; j <= 16; ++j) EXPECT_EQ(p.h(i, j)(0), 0.0);
  }
}

TEST(DelayPn, ContractionPerPath) {
  const auto e = simulate(models::brownian(2, zero_vec(2)), TimeGrid(96), 200, 4);
  for (const auto& shift : {shifts::state(2), shifts::sine_state(2)}) {
    const auto u = materialize(shift, e);
    for (std::size_t n : {3u, 4u, 8u, 12u, 32u}) {
      const auto p = delay_pn(u, n);
      for (std::size_t i = 0; i < e.n_paths(); ++i) EXPECT_LE(p.h_norm_sq(i), u.h_norm_sq(i));
    }
  }
}

TEST(DelayPn, ConstantDerivativeDistance) {
  const auto e = still_paths(64);
  const auto u = materialize(shifts::constant(vec1(1.5)), e);
  double previous = 1e300;
  for (std::size_t n : {4u, 8u, 16u, 32u}) {
    const auto p = delay_pn(u, n);
    const auto diff = combine(1.0, p, -1.0, u);
    const double dist = diff.h_norm_sq(0);
    EXPECT_NEAR(dist, 2.0 / n * 1.5 * 1.5, 1e-12);
    EXPECT_LT(dist, previous);
    previous = dist;
  }
}

TEST(DelayPn, LagOnlyUsesOlderData) {
  // Changing u after time t_j - 2/n must not change p_n(u) at step j.
  const auto e = still_paths(32);
  std::vector<double> a(32, 1.0), b(32, 1.0);
  for (std::size_t j = 20; j < 32; ++j) b[j] = -7.0;
  const auto pa = delay_pn(materialize(table_shift(a), e), 8);
  const auto pb = delay_pn(materialize(table_shift(b), e), 8);
  for (std::size_t j = 0; j < 32; ++j) {
    if (j < 20 + 8) EXPECT_EQ(pa.hdot(0, j)(0), pb.hdot(0, j)(0)) << j;
  }
}

TEST(DelayPn, GridMustBeDivisible) {
  const auto e = still_paths(30);
  const auto u = materialize(shifts::constant(vec1(1)), e);
  EXPECT_THROW(delay_pn(u, 4), GridError);
  EXPECT_THROW(delay_pn(u, 2), GridError);
  EXPECT_NO_THROW(delay_pn(u, 5));
}

TEST(EndpointRn, VanishesAtOne) {
  const auto e = simulate(models::brownian(2, zero_vec(2)), TimeGrid(64), 100, 5);
  const auto u = materialize(shifts::sine_state(2), e);
  for (std::size_t n : {4u, 8u, 16u, 32u}) {
    const auto r = endpoint_rn(u, n);
    for (std::size_t i = 0; i < e.n_paths(); ++i) {
      EXPECT_EQ(r.h(i, 64)(0), 0.0);
      EXPECT_EQ(r.h(i, 64)(1), 0.0);
    }
    const auto q = endpoint_qn(u, n);
    for (std::size_t i = 0; i < e.n_paths(); ++i) {
      EXPECT_LE(q.sup_norm(i), u.sup_norm(i) * (1.0 + 1e-12));
    }
  }
}

TEST(EndpointRn, ConstantDerivativeIsNotApproximated) {
  // r_n(u) vanishes at 1 while u_1 = c: distance (n-2)^2/n + 2/n grows with n.
  const auto e = still_paths(64);
  const auto u = materialize(shifts::constant(vec1(1.0)), e);
  for (std::size_t n : {4u, 8u, 16u, 32u}) {
    const double dist = combine(1.0, endpoint_rn(u, n), -1.0, u).h_norm_sq(0);
    EXPECT_NEAR(dist, double((n - 2) * (n - 2)) / n + 2.0 / n, 1e-9);
  }
}

TEST(EndpointRn, ConvergesForDeterministicEndpointZeroShift) {
  const auto e = still_paths(64);
  const auto u = materialize(shifts::cosine(vec1(1.0), 1), e);
  double previous = 1e300;
  for (std::size_t n : {4u, 8u, 16u, 32u}) {
    const double dist = combine(1.0, endpoint_rn(u, n), -1.0, u).h_norm_sq(0);
    EXPECT_LT(dist, previous);
    previous = dist;
  }
}

TEST(EndpointRn, ConvergesForEndpointZeroShift) {
  const auto e = simulate(models::brownian(1, zero_vec(1)), TimeGrid(64), 50, 6);
  const auto u = endpoint_rn(materialize(shifts::sine_state(1), e), 4);
  double d4 = 0, d32 = 0;
  for (std::size_t i = 0; i < e.n_paths(); ++i) {
    d4 += combine(1.0, endpoint_rn(u, 4), -1.0, u).h_norm_sq(i);
    d32 += combine(1.0, endpoint_rn(u, 32), -1.0, u).h_norm_sq(i);
  }
  EXPECT_LT(d32, d4);
}

TEST(EndpointRn, NeedsFullHorizon) {
  const auto e = simulate(models::pinned_brownian(vec1(0), vec1(0)), TimeGrid(16), 3, 1);
  const auto u = materialize(shifts::state(1), e);
  EXPECT_THROW(endpoint_rn(u, 4), GridError);
  EXPECT_NO_THROW(delay_pn(u, 4));
}

TEST(StopTruncate, HandBuiltFourStepPath) {
  const auto e = still_paths(4);
  const auto u = materialize(table_shift({2, 2, -1, -3}), e);
  ASSERT_EQ(u.h(0, 4)(0), 0.0);
  const double level = std::sqrt(1.5);
  EXPECT_EQ(truncation_step(u, 0, level), 2u);
  const auto k = stop_truncate(u, level);
  const double expected[] = {2, 2, -2, -2};
  for (std::size_t j = 0; j < 4; ++j) EXPECT_DOUBLE_EQ(k.hdot(0, j)(0), expected[j]);
  EXPECT_EQ(k.h(0, 4)(0), 0.0);
  EXPECT_LT(k.h_norm_sq(0), u.h_norm_sq(0));
}

TEST(StopTruncate, LargeLevelIsIdentity) {
  const auto e = simulate(models::brownian(1, zero_vec(1)), TimeGrid(32), 30, 7);
  const auto u = endpoint_rn(materialize(shifts::state(1), e), 4);
  const auto k = stop_truncate(u, 1e6);
  EXPECT_EQ(k.hdot_data(), u.hdot_data());
}

TEST(StopTruncate, ContractionsPerPath) {
  const auto e = simulate(models::brownian(2, zero_vec(2)), TimeGrid(64), 300, 8);
  const auto u = endpoint_rn(materialize(shifts::state(2), e), 8);
  for (double level : {0.05, 0.2, 0.5}) {
    const auto k = stop_truncate(u, level);
    for (std::size_t i = 0; i < e.n_paths(); ++i) {
      EXPECT_LE(k.h_norm_sq(i), u.h_norm_sq(i) * (1.0 + 1e-12));
      EXPECT_EQ(k.h(i, 64).norm(), 0.0);
      const std::size_t tau = truncation_step(u, i, level);
      double stopped_sup = 0.0;
      for (std::size_t j = 0; j <= tau; ++j) stopped_sup = std::max(stopped_sup, u.h(i, j).norm());
      EXPECT_LE(k.sup_norm(i), 2.0 * stopped_sup + 1e-15);
    }
  }
}

TEST(StopTruncate, RejectsNonEndpointZero) {
  const auto e = still_paths(8);
  const auto u = materialize(shifts::constant(vec1(1)), e);
  EXPECT_THROW(stop_truncate(u, 1.0), PreconditionError);
}

TEST(Linearity, OperatorsCommuteWithCombinations) {
  const auto e = simulate(models::brownian(1, zero_vec(1)), TimeGrid(32), 40, 9);
  const auto u = materialize(shifts::state(1), e);
  const auto v = materialize(shifts::sine_state(1), e);
  const auto lhs = endpoint_rn(combine(2.0, u, -0.5, v), 8);
  const auto rhs = combine(2.0, endpoint_rn(u, 8), -0.5, endpoint_rn(v, 8));
  for (std::size_t k = 0; k < lhs.hdot_data().size(); ++k) {
    EXPECT_NEAR(lhs.hdot_data()[k], rhs.hdot_data()[k], 1e-12);
  }
}

TEST(Projection, DeterministicGivesConstantDerivative) {
  const auto e = still_paths(50, 1000);
  const auto u = materialize(shifts::cosine(vec1(1.0), 1), e);
  const auto shifted = materialize(shifts::constant(vec1(0.8)), e);
  const auto sum = combine(1.0, u, 1.0, shifted);
  const auto proj = martingale_projection(e, sum, features::quadratic(1, true));
  const double u1 = sum.h(0, 50)(0);
  for (std::size_t j = 0; j < 50; ++j) EXPECT_NEAR(proj.m.hdot(0, j)(0), u1, 1e-10);
  // Endpoint-zero input orthogonal to constants projects to zero.
  const auto zero = martingale_projection(e, u, features::quadratic(1, true));
  for (std::size_t j = 0; j < 50; ++j) EXPECT_NEAR(zero.m.hdot(0, j)(0), 0.0, 1e-12);
}

TEST(Projection, BrownianStateShiftDefects) {
  const auto e = simulate(models::brownian(1, zero_vec(1)), TimeGrid(50), 20000, 10);
  const auto u = materialize(shifts::state(1), e);
  const auto proj = martingale_projection(e, u, features::quadratic(1, true));
  const auto& r = proj.report;
  EXPECT_LT(std::abs(r.orthogonality.mean), 4.0 * r.orthogonality.std_error + 1e-12);
  EXPECT_LT(r.endpoint_defect, 1e-6 * r.norm_scale);
}

// Coin-flip tree: all 2^K sign sequences, increments +-sqrt(dt), each path
// repeated so that the ensemble is large enough. Prefix features are one-hot
// node indicators, so the regression is the exact conditional expectation.
struct Tree {
  static constexpr std::size_t kSteps = 6;
  static constexpr std::size_t kCopies = 16;
  static std::size_t leaf(std::size_t i) { return i / kCopies; }
  static int sign(std::size_t leaf, std::size_t j) { return (leaf >> j) & 1U ? 1 : -1; }
};

PathEnsemble tree_ensemble() {
  const std::size_t n = (std::size_t{1} << Tree::kSteps) * Tree::kCopies;
  PathEnsemble e(TimeGrid(Tree::kSteps), n, 1, Tree::kSteps, 0,
                 PathEnsemble::DiffusionStorage::kConstant);
  const double s = std::sqrt(e.grid().dt());
  for (std::size_t i = 0; i < n; ++i) {
    e.state(i, 0)(0) = 0.0;
    for (std::size_t j = 0; j < Tree::kSteps; ++j) {
      e.state(i, j + 1)(0) = e.state(i, j)(0) + s * Tree::sign(Tree::leaf(i), j);
    }
  }
  e.diffusion(0, 0)(0, 0) = 1.0;
  return e;
}

FeatureMap node_indicators() {
  FeatureMap m;
  for (std::size_t k = 0; k < (std::size_t{1} << (Tree::kSteps - 1)); ++k) {
    m.names.push_back("node" + std::to_string(k));
  }
  m.evaluate = [](const PathPrefix& p, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    std::size_t idx = 0;
    for (std::size_t j = 0; j < p.step(); ++j) {
      if (p.at(j + 1)(0) > p.at(j)(0)) idx |= std::size_t{1} << j;
    }
    out[idx] = 1.0;
  };
  return m;
}

TEST(Projection, MatchesBruteForceQuadraticProgramOnTree) {
  const auto e = tree_ensemble();
  const auto u = materialize(shifts::state(1), e);
  const auto proj = martingale_projection(e, u, node_indicators());

  // Unknowns: mdot at node (k, prefix bits b < 2^k); constraints: sum_k mdot dt
  // equals u_K on every leaf. Minimize sum_nodes P(node) mdot^2 dt (KKT system).
  const std::size_t k_steps = Tree::kSteps;
  const std::size_t leaves = std::size_t{1} << k_steps;
  std::vector<std::size_t> offset(k_steps + 1, 0);
  for (std::size_t k = 0; k < k_steps; ++k) offset[k + 1] = offset[k] + (std::size_t{1} << k);
  const std::size_t nv = offset[k_steps];
  const double dt = e.grid().dt();
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(nv + leaves, nv + leaves);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nv + leaves);
  for (std::size_t k = 0; k < k_steps; ++k) {
    for (std::size_t b = 0; b < (std::size_t{1} << k); ++b) {
      kkt(offset[k] + b, offset[k] + b) = 2.0 * dt / double(std::size_t{1} << k);
    }
  }
  for (std::size_t l = 0; l < leaves; ++l) {
    for (std::size_t k = 0; k < k_steps; ++k) {
      const std::size_t node = offset[k] + (l & ((std::size_t{1} << k) - 1));
      kkt(nv + l, node) = dt;
      kkt(node, nv + l) = dt;
    }
    rhs(nv + l) = u.h(l * Tree::kCopies, k_steps)(0);
  }
  const Eigen::VectorXd sol = kkt.fullPivLu().solve(rhs);
  for (std::size_t l = 0; l < leaves; ++l) {
    const std::size_t i = l * Tree::kCopies;
    for (std::size_t k = 0; k < k_steps; ++k) {
      const double expected = sol(offset[k] + (l & ((std::size_t{1} << k) - 1)));
      EXPECT_NEAR(proj.m.hdot(i, k)(0), expected, 1e-9) << "leaf " << l << " step " << k;
    }
  }
  EXPECT_LT(std::abs(proj.report.orthogonality.mean), 1e-12);
  EXPECT_LT(proj.report.endpoint_defect, 1e-20);
}

}  // namespace
}  // namespace varlab
