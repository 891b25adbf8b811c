#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "rough/rough_path.hpp"

using namespace rough;

TEST(Lift, LinearPathGivesHalfSquare) {
  Vector v(3);
  v << 1.0, -2.0, 0.5;
  const auto rp = lift_piecewise_linear({Vector::Zero(3), v}, {0.0, 1.0});
  const auto inc = rp.increment(0, 1);
  EXPECT_TRUE(inc.level1().isApprox(v));
  EXPECT_LE((inc.level2() - 0.5 * oracle::outer(v, v)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Lift, ConstantPathHasIdentityIncrements) {
  const Vector p = Vector::Constant(2, 3.0);
  const auto rp = lift_piecewise_linear({p, p, p}, {0.0, 0.5, 1.0});
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = i; j < 3; ++j) EXPECT_EQ(hom_norm(rp.increment(i, j)), 0.0);
}

TEST(Lift, TwoSegmentsShuffle) {
  std::mt19937_64 rng(11);
  const Vector v = oracle::random_vec(rng, 2), w = oracle::random_vec(rng, 2);
  const auto rp = lift_piecewise_linear({Vector::Zero(2), v, v + w}, {0.0, 0.3, 1.0});
  const Matrix expected = 0.5 * oracle::outer(v, v) + 0.5 * oracle::outer(w, w) + oracle::outer(v, w);
  EXPECT_LE((rp.increment(0, 2).level2() - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Lift, MatchesRiemannSignature) {
  std::mt19937_64 rng(12);
  const auto pts = oracle::random_polyline(rng, 3, 6);
  const auto rp = lift_piecewise_linear(pts, oracle::uniform_times(6));
  const auto ref = oracle::riemann_signature(pts, 20000);
  // Left-point sums lose Σ δ⊗δ/2 per segment, which is O(1/refine).
  EXPECT_LE((rp.increment(0, 6).level2() - ref.l2).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(Lift, RejectsBadInput) {
  EXPECT_THROW(lift_piecewise_linear({Vector::Zero(1), Vector::Ones(1)}, {0.0, 0.0}), std::invalid_argument);
  EXPECT_THROW(lift_piecewise_linear({Vector::Zero(1), Vector::Ones(1)}, {0.0}), std::invalid_argument);
}

TEST(ChenDefect, StoredPathsAreMultiplicative) {
  std::mt19937_64 rng(13);
  const auto pts = oracle::random_polyline(rng, 2, 20);
  EXPECT_LE(chen_defect(lift_piecewise_linear(pts, oracle::uniform_times(20))), 1e-13);
  EXPECT_LE(chen_defect(pure_area_path(oracle::uniform_times(10), Matrix::Identity(2, 2))), 1e-13);
}

TEST(ChenDefect, DetectsCorruptedIncrement) {
  std::mt19937_64 rng(14);
  const auto pts = oracle::random_polyline(rng, 2, 4);
  const auto rp = lift_piecewise_linear(pts, oracle::uniform_times(4));
  const GridMap corrupted = [&](std::size_t i, std::size_t j) {
    auto g = rp.increment(i, j);
    if (i == 0 && j == 4) {
      Matrix l2 = g.level2();
      l2(0, 1) += 0.1;
      return GroupElement2(g.level1(), l2);
    }
    return g;
  };
  EXPECT_GE(chen_defect(5, corrupted), 0.09);
}

TEST(PvarNorm, LinearPath) {
  const auto flat = lift_piecewise_linear({Vector::Ones(1), Vector::Ones(1)}, {0.0, 1.0});
  EXPECT_EQ(pvar_norm(flat, 2.0), 0.0);
  std::vector<Vector> pts;
  for (int k = 0; k <= 16; ++k) pts.push_back(Vector::Constant(1, k / 16.0));
  const auto rp = lift_piecewise_linear(pts, oracle::uniform_times(16));
  // |x_{s,t}| / (t-s)^{1/2} = (t-s)^{1/2}, largest on the full interval.
  EXPECT_NEAR(pvar_norm(rp, 2.0), 1.0, 1e-14);
  EXPECT_NEAR(pvar_norm(rp.dilated(3.0), 2.0), 3.0, 1e-13);
}

TEST(Geometricity, PolylinesArePureShuffle) {
  std::mt19937_64 rng(15);
  for (int m = 1; m <= 4; ++m) {
    const auto pts = oracle::random_polyline(rng, m, 30);
    EXPECT_LE(geometricity_defect(lift_piecewise_linear(pts, oracle::uniform_times(30))), 1e-12);
  }
}

TEST(Geometricity, PureAreaDefectIsHorizon) {
  const auto rp = pure_area_path(oracle::uniform_times(8, 2.0), Matrix::Identity(1, 1));
  EXPECT_NEAR(geometricity_defect(rp), 2.0, 1e-15);
}

TEST(Geometricity, ItoLiftIsNotGeometric) {
  const auto rp = brownian_lift(42, 2000, 1.0, 2, Convention::Ito);
  EXPECT_GT(geometricity_defect(rp), 0.2);
}

TEST(Decompose, GeometricInputHasNoDrift) {
  std::mt19937_64 rng(16);
  const auto pts = oracle::random_polyline(rng, 2, 10);
  const auto dec = decompose(lift_piecewise_linear(pts, oracle::uniform_times(10)));
  for (const auto& b : dec.drift.beta) EXPECT_LE(b.cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Decompose, PureAreaDriftIsTime) {
  const auto times = oracle::uniform_times(10);
  const auto dec = decompose(pure_area_path(times, Matrix::Identity(1, 1)));
  for (std::size_t k = 0; k < times.size(); ++k) {
    EXPECT_NEAR(dec.drift.beta[k](0, 0), times[k], 1e-15);
    EXPECT_EQ(hom_norm(dec.geometric.value(k)), 0.0);
  }
}

TEST(Decompose, RoundTripOnRandomRoughPaths) {
  std::mt19937_64 rng(17);
  std::vector<GroupElement2> incs;
  for (int k = 0; k < 12; ++k) incs.emplace_back(oracle::random_vec(rng, 3), oracle::random_mat(rng, 3, 3));
  const auto rp = RoughPath::from_increments(oracle::uniform_times(12), incs);
  const auto dec = decompose(rp);
  EXPECT_LE(geometricity_defect(dec.geometric), 1e-13);
  const auto back = recompose(dec.geometric, dec.drift);
  EXPECT_LE((back.level1_data() - rp.level1_data()).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_LE((back.level2_data() - rp.level2_data()).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Brownian, SingleStepConventions) {
  const auto ito = brownian_lift(3, 1, 1.0, 2, Convention::Ito);
  const auto strat = brownian_lift(3, 1, 1.0, 2, Convention::Stratonovich);
  const Vector dw = ito.level1_increment(0, 1);
  EXPECT_TRUE(strat.level1_increment(0, 1).isApprox(dw));
  EXPECT_EQ(ito.increment(0, 1).level2().cwiseAbs().maxCoeff(), 0.0);
  EXPECT_LE((strat.increment(0, 1).level2() - 0.5 * oracle::outer(dw, dw)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Brownian, ItoDriftIsMinusHalfTime) {
  const double T = 1.0;
  const auto dec = decompose(brownian_lift(42, 100000, T, 2, Convention::Ito));
  EXPECT_LE((dec.drift.beta.back() + 0.5 * T * Matrix::Identity(2, 2)).norm(), 0.05 * T);
}

TEST(Brownian, StratonovichIsNearlyGeometric) {
  EXPECT_LE(geometricity_defect(brownian_lift(42, 100000, 1.0, 2, Convention::Stratonovich)), 0.02);
}

TEST(RoughPath, ValueAtInterpolatesGeodesically) {
  std::mt19937_64 rng(18);
  const Vector v = oracle::random_vec(rng, 2);
  const auto rp = lift_piecewise_linear({Vector::Zero(2), v}, {0.0, 1.0});
  const auto mid = rp.value_at(0.25);
  EXPECT_LE((mid.level2() - 0.5 * oracle::outer(0.25 * v, 0.25 * v)).cwiseAbs().maxCoeff(), 1e-15);
  const auto area = pure_area_path({0.0, 2.0}, Matrix::Identity(1, 1));
  EXPECT_NEAR(area.value_at(0.5).level2()(0, 0), 0.5, 1e-15);
}

TEST(RoughPath, ResampledKeepsChen) {
  std::mt19937_64 rng(19);
  const auto rp = lift_piecewise_linear(oracle::random_polyline(rng, 2, 5), oracle::uniform_times(5));
  const auto fine = rp.resampled(oracle::uniform_times(64));
  EXPECT_LE(max_abs_diff(fine.increment(0, 64), rp.increment(0, 5)), 1e-13);
  EXPECT_LE(geometricity_defect(fine), 1e-12);
}

TEST(RoughPath, DilationScalesLevels) {
  std::vector<GroupElement2> incs{{Vector::Ones(2), Matrix::Identity(2, 2)}};
  const auto rp = RoughPath::from_increments({0.0, 1.0}, incs).dilated(3.0);
  EXPECT_DOUBLE_EQ(rp.level1_increment(0, 1)(0), 3.0);
  EXPECT_DOUBLE_EQ(rp.increment(0, 1).level2()(1, 1), 9.0);
}

TEST(Control, TimeControlIsSuperadditive) {
  EXPECT_LE(superadditivity_violation(time_control(), oracle::uniform_times(10)), 1e-15);
  const Control sqrt_control = [](double s, double t) { return std::sqrt(t - s); };
  EXPECT_GT(superadditivity_violation(sqrt_control, oracle::uniform_times(10)), 0.0);
}

TEST(SubGrid, KeepsEndpoints) {
  const auto idx = strided_indices(1001, 64);
  EXPECT_LE(idx.size(), 64u);
  EXPECT_EQ(idx.front(), 0u);
  EXPECT_EQ(idx.back(), 1000u);
}
