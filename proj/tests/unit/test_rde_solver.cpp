#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "rough/rde_solver.hpp"

using namespace rough;

namespace {

SolverConfig mesh(int level) {
  SolverConfig cfg;
  cfg.mesh_level = level;
  return cfg;
}

RoughPath time_driver(double T) {
  return lift_piecewise_linear({Vector::Zero(1), Vector::Constant(1, T)}, {0.0, T});
}

Vector v2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST(SolveRDE, ZeroFieldIsConstant) {
  std::mt19937_64 rng(51);
  const auto x = lift_piecewise_linear(oracle::random_polyline(rng, 2, 10), oracle::uniform_times(10));
  const auto sol = solve_rde(x, zero_field(3, 2), Vector::Ones(3), 1.0);
  for (std::size_t k = 0; k < sol.y().size(); ++k) {
    EXPECT_EQ((sol.y()[k] - Vector::Ones(3)).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(sol.path.cross(0, k).cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(SolveRDE, ExponentialAlongTime) {
  const double a = 1.7;
  const auto sol = solve_rde(time_driver(1.0), identity_field(1), Vector::Constant(1, a), 1.0, mesh(12));
  EXPECT_NEAR(sol.y().back()(0), a * std::exp(1.0), 1e-6 * a * std::exp(1.0));
  // cross(0,1) = ∫_0^1 (y_r - y_0) dr = a(e - 2).
  const std::size_t n = sol.y().size() - 1;
  EXPECT_NEAR(sol.path.cross(0, n)(0, 0), a * (std::exp(1.0) - 2.0), 1e-6);
  EXPECT_LE(sol.path.additivity_defect(), 1e-12);
}

TEST(SolveRDE, DossSussmannForScalarGeometricDriver) {
  std::mt19937_64 rng(52);
  for (int trial = 0; trial < 3; ++trial) {
    const auto pts = oracle::random_polyline(rng, 1, 15, 1.5);
    const auto x = lift_piecewise_linear(pts, oracle::uniform_times(15));
    const auto sol = solve_rde(x, identity_field(1), Vector::Constant(1, 0.8), 1.0, mesh(14));
    const double exact = 0.8 * std::exp(pts.back()(0) - pts.front()(0));
    EXPECT_NEAR(sol.y().back()(0), exact, 1e-6 * exact);
  }
}

TEST(SolveRDE, MatrixExponentialOracle) {
  Matrix A(2, 2);
  A << -0.5, 1.0, -1.0, -0.2;
  const Vector a = v2(1.0, 0.5);
  const auto sol = solve_rde(time_driver(2.0), linear_field({A}), a, 2.0, mesh(12));
  for (std::size_t k = 0; k < sol.y().size(); k += 256) {
    const Vector ref = oracle::expm(A * sol.times()[k]) * a;
    EXPECT_LE((sol.y()[k] - ref).norm(), 1e-6 * std::max(1.0, ref.norm()));
  }
}

TEST(SolveRDE, NonCommutingFieldsAlongPolylineMatchRK4) {
  std::mt19937_64 rng(53);
  const std::vector<Matrix> A{oracle::random_mat(rng, 2, 2, 0.7), oracle::random_mat(rng, 2, 2, 0.7)};
  const auto f = linear_field(A);
  const auto pts = oracle::random_polyline(rng, 2, 8);
  const auto times = oracle::uniform_times(8);
  const Vector a = v2(1.0, -0.3);
  const auto ref = oracle::rk4_polyline([&](const Vector& y) { return f.eval(y); }, a, pts);
  const auto sol = solve_rde(lift_piecewise_linear(pts, times), f, a, 1.0, mesh(14));
  // Mesh points 2048·k coincide with the polyline vertices.
  for (int k = 0; k <= 8; ++k) EXPECT_LE((sol.y()[2048 * k] - ref[k]).norm(), 1e-6) << k;
}

TEST(SolveRDE, CounterexampleAlongPolylineMatchesRK4) {
  std::mt19937_64 rng(54);
  const auto pts = oracle::random_polyline(rng, 1, 8);
  const auto f = counterexample_field();
  const auto ref = oracle::rk4_polyline([&](const Vector& y) { return f.eval(y); }, v2(1.0, 0.0), pts);
  const auto sol = solve_rde(lift_piecewise_linear(pts, oracle::uniform_times(8)), f, v2(1.0, 0.0), 1.0, mesh(12));
  EXPECT_LE((sol.y().back() - ref.back()).norm(), 1e-5 * std::max(1.0, ref.back().norm()));
}

TEST(SolveRDE, StepsOnDriverGridByDefault) {
  const auto x = lift_piecewise_linear({Vector::Zero(1), Vector::Ones(1), Vector::Zero(1)}, {0.0, 0.5, 1.0});
  const auto sol = solve_rde(x, identity_field(1), Vector::Ones(1), 1.0);
  EXPECT_EQ(sol.diagnostics.steps, 2u);
}

TEST(SolveRDE, RejectsBadInput) {
  const auto x = time_driver(1.0);
  EXPECT_THROW(solve_rde(x, identity_field(2), Vector::Ones(1), 1.0), std::invalid_argument);
  EXPECT_THROW(solve_rde(x, identity_field(1), Vector::Ones(1), 2.0), std::invalid_argument);
  SolverConfig cfg;
  cfg.p = 3.5;
  EXPECT_THROW(solve_rde(x, identity_field(1), Vector::Ones(1), 1.0, cfg), std::invalid_argument);
}

TEST(SolveRDE, NonFiniteFieldRaises) {
  const VectorField bad(
      1, 1, 1,
      [](const Vector& y) {
        return Matrix::Constant(1, 1, y(0) > 1.5 ? std::numeric_limits<double>::quiet_NaN() : y(0));
      },
      [](const Vector&) { return Gradient{Matrix::Ones(1, 1)}; });
  try {
    solve_rde(time_driver(1.0), bad, Vector::Ones(1), 1.0, mesh(8));
    FAIL() << "expected FieldEvaluationError";
  } catch (const FieldEvaluationError& e) {
    EXPECT_GT(e.state()(0), 1.5);
    EXPECT_GT(e.time(), std::log(1.5) - 0.01);
  }
}

TEST(SolveRDE, ProjectionHookIsApplied) {
  SolverConfig cfg = mesh(6);
  cfg.project = [](Vector& y) { y(1) = 0.0; };
  const auto sol = solve_rde(time_driver(1.0), identity_field(2), v2(1.0, 1.0), 1.0, cfg);
  for (const auto& y : sol.y()) EXPECT_EQ(y(1), 0.0);
}

TEST(SolveRDE, StepDefectIsTracked) {
  SolverConfig cfg = mesh(6);
  cfg.track_step_defect = true;
  const auto sol = solve_rde(time_driver(1.0), counterexample_field(), v2(1.0, 0.5), 1.0, cfg);
  EXPECT_GT(sol.diagnostics.max_step_defect, 0.0);
  EXPECT_LT(sol.diagnostics.max_step_defect, 1e-4);
}

TEST(SolveCorrected, ZeroDriftMatchesPlainSolver) {
  std::mt19937_64 rng(55);
  const auto x = lift_piecewise_linear(oracle::random_polyline(rng, 2, 10), oracle::uniform_times(10));
  const auto f2d = linear_field({oracle::random_mat(rng, 2, 2), oracle::random_mat(rng, 2, 2)});
  const auto plain = solve_rde(x, f2d, v2(0.3, 0.4), 1.0, mesh(8));
  const auto corr = solve_rde_corrected(x, AreaDrift::zero(x.times(), 2), f2d, f_dot_grad_f(f2d), v2(0.3, 0.4),
                                        1.0, mesh(8));
  ASSERT_EQ(plain.y().size(), corr.y().size());
  for (std::size_t k = 0; k < plain.y().size(); ++k) EXPECT_LE((plain.y()[k] - corr.y()[k]).norm(), 1e-14);
}

TEST(SolveCorrected, PureAreaExplosion) {
  const double T = 1.5;
  const auto dec = decompose(pure_area_path({0.0, T}, Matrix::Identity(1, 1)));
  const auto f2 = counterexample_second_order();
  const auto sol = solve_rde_corrected(dec.geometric, dec.drift, counterexample_field(), f2, f2, v2(1.0, 0.0), T,
                                       mesh(16));
  ASSERT_TRUE(sol.blowup.has_value());
  EXPECT_NEAR(sol.blowup->crossing_time, 1.0, 0.05);
  double worst = 0.0;
  for (std::size_t k = 0; k < sol.y().size(); ++k) {
    EXPECT_EQ(sol.y()[k](1), 0.0);
    const double t = sol.times()[k];
    if (t <= 0.9) worst = std::max(worst, std::abs(sol.y()[k](0) * (1.0 - t) - 1.0));
  }
  EXPECT_LE(worst, 1e-3);
}

TEST(SolveCorrected, RouteEquivalenceWithSymmetricDrift) {
  std::mt19937_64 rng(56);
  const auto times = oracle::uniform_times(16);
  const auto x_hat = lift_piecewise_linear(oracle::random_polyline(rng, 2, 16), times);
  AreaDrift beta;
  beta.times = times;
  Matrix S = oracle::random_mat(rng, 2, 2);
  S = 0.5 * (S + S.transpose());
  for (double t : times) beta.beta.push_back(S * std::sin(3.0 * t));
  const auto f = linear_field({oracle::random_mat(rng, 2, 2, 0.5), oracle::random_mat(rng, 2, 2, 0.5)});
  const Vector a = v2(1.0, 2.0);
  const auto direct = solve_rde(recompose(x_hat, beta), f, a, 1.0, mesh(12));
  const auto corrected = solve_rde_corrected(x_hat, beta, f, f_dot_grad_f(f), a, 1.0, mesh(12));
  double diff = 0.0;
  for (std::size_t k = 0; k < direct.y().size(); ++k) diff = std::max(diff, (direct.y()[k] - corrected.y()[k]).norm());
  EXPECT_LE(diff, 1e-6);
}

TEST(DetectBlowup, BisectsCrossing) {
  for (double a : {1.0, 2.0}) {
    const auto state = [a](double t) { return Vector::Constant(1, a / (1.0 - a * t)); };
    const double t_star = 1.0 / a;
    const auto rec = detect_blowup(state, 0.9 * t_star, t_star * (1.0 - 1e-8), 1e6, state(0.9 * t_star).norm());
    // a/(1 - a t) = 1e6 at t = (1 - a·1e-6)/a.
    EXPECT_NEAR(rec.crossing_time, (1.0 - a * 1e-6) / a, 1e-9);
    EXPECT_EQ(rec.threshold, 1e6);
  }
}

TEST(DetectBlowup, NoCrossingNoRecord) {
  const auto sol = solve_rde(time_driver(1.0), identity_field(1), Vector::Ones(1), 1.0, mesh(8));
  EXPECT_FALSE(sol.blowup.has_value());
}

TEST(Partition, InequalityAndScaling) {
  std::mt19937_64 rng(57);
  const auto f = tanh_field({oracle::random_mat(rng, 2, 2)});
  const auto x = lift_piecewise_linear(oracle::random_polyline(rng, 2, 40, 2.0), oracle::uniform_times(40));
  const auto P = adaptive_partition(x, f.bounds(), 1.0);
  const double N = static_cast<double>(P.intervals());
  const double unit = P.L * std::pow(P.driver_norm, -2.0);
  EXPECT_LE((N - 1) * unit, 1.0 * (1 + 1e-12));
  EXPECT_GE(N * unit, 1.0 * (1 - 1e-12));
  EXPECT_DOUBLE_EQ(P.times.front(), 0.0);
  EXPECT_DOUBLE_EQ(P.times.back(), 1.0);

  const auto P2 = adaptive_partition(x.dilated(2.0), f.bounds(), 1.0);
  EXPECT_NEAR(static_cast<double>(P2.intervals()) / N, 4.0, 4.0 / std::sqrt(N) + 0.5);
}

TEST(Partition, ConstantDriverGivesOneInterval) {
  const auto x = lift_piecewise_linear({Vector::Ones(1), Vector::Ones(1)}, {0.0, 1.0});
  const auto f = tanh_field({Matrix::Ones(1, 1)});
  EXPECT_EQ(adaptive_partition(x, f.bounds(), 1.0).intervals(), 1u);
}

TEST(Partition, NeedsDeclaredBounds) {
  EXPECT_THROW(partition_constant(FieldBounds{}, {}), std::invalid_argument);
}

TEST(AprioriBound, ZeroFieldAndLinearGrowthInHorizon) {
  const auto x = time_driver(3.0);
  FieldBounds zero{0.0, 0.0, 0.0};
  const auto sol = solve_rde(x, zero_field(1, 1), Vector::Ones(1), 3.0);
  EXPECT_GE(apriori_sup_bound(zero, x, 3.0, {}, 1.0), 0.0);
  EXPECT_EQ(sol.sup_deviation(), 0.0);

  const auto f = tanh_field({Matrix::Ones(1, 1)});
  const double b1 = apriori_sup_bound(f.bounds(), x, 1.0, {}, 1.0);
  const double b2 = apriori_sup_bound(f.bounds(), x, 2.0, {}, 1.0);
  const double b3 = apriori_sup_bound(f.bounds(), x, 3.0, {}, 1.0);
  EXPECT_NEAR(b3 - b2, b2 - b1, 1e-12 * b3);
  EXPECT_GT(b2, b1);
}

TEST(AprioriBound, BoundedFieldTrajectories) {
  std::mt19937_64 rng(58);
  const auto f = tanh_field({oracle::random_mat(rng, 2, 2), oracle::random_mat(rng, 2, 2)},
                            {oracle::random_vec(rng, 2), oracle::random_vec(rng, 2)});
  for (int i = 0; i < 10; ++i) {
    const auto x = lift_piecewise_linear(oracle::random_polyline(rng, 2, 20, 2.0), oracle::uniform_times(20));
    const auto sol = solve_rde(x, f, oracle::random_vec(rng, 2), 1.0, mesh(8));
    EXPECT_LE(sol.sup_deviation(), apriori_sup_bound(f.bounds(), x, 1.0));
  }
}

TEST(Growth, ExponentialIsLinearInScale) {
  const auto x = time_driver(1.0);
  SolverConfig cfg = mesh(12);
  const auto rep = growth_bound_check(identity_field(1), x, Vector::Constant(1, 2.0), 1.0, cfg, {1.0, 2.0, 3.0});
  ASSERT_EQ(rep.rows.size(), 3u);
  for (const auto& r : rep.rows) EXPECT_NEAR(std::log(r.sup_y), std::log(2.0) + r.lambda, 1e-6);
  EXPECT_TRUE(rep.passed);
  EXPECT_GE(rep.min_slack, 0.0);
}

TEST(Growth, CounterexampleDoesNotExplodeOnGeometricDrivers) {
  std::mt19937_64 rng(59);
  const double T = 5.0;
  const auto x = lift_piecewise_linear(oracle::random_polyline(rng, 1, 25, 1.0, T), oracle::uniform_times(25, T));
  const auto rep = growth_bound_check(counterexample_field(), x, v2(1.0, 0.0), T, mesh(10));
  EXPECT_FALSE(rep.any_explosion);
  EXPECT_TRUE(rep.passed) << rep.note;
  EXPECT_GE(rep.c2, 0.0);
}

TEST(Growth, ZeroDriverKeepsInitialValue) {
  const auto x = time_driver(1.0).dilated(0.0);
  const auto sol = solve_rde(x, counterexample_field(), v2(3.0, 4.0), 1.0, mesh(6));
  EXPECT_DOUBLE_EQ(sol.sup_norm(), 5.0);
}

TEST(Growth, RejectsNonGeometricDriver) {
  const auto x = pure_area_path({0.0, 1.0}, Matrix::Identity(1, 1));
  EXPECT_THROW(growth_bound_check(counterexample_field(), x, v2(1.0, 0.0), 1.0), std::invalid_argument);
}
