#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "rough/vector_field.hpp"

using namespace rough;

namespace {

Vector v2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST(FDotGradF, ScalarIdentity) {
  const auto f2 = f_dot_grad_f(identity_field(1));
  for (double y : {-2.0, 0.0, 0.7, 5.0}) EXPECT_DOUBLE_EQ(f2.eval(Vector::Constant(1, y))(0, 0), y);
}

TEST(FDotGradF, CounterexampleClosedForm) {
  const auto assembled = f_dot_grad_f(counterexample_field());
  const auto closed = counterexample_second_order();
  std::mt19937_64 rng(31);
  for (int i = 0; i < 100; ++i) {
    const Vector xi = oracle::random_vec(rng, 2, 3.0);
    const double e1 = std::sin(xi(1)) * std::sin(xi(1)) * xi(0) + xi(0) * xi(0) * std::cos(xi(1));
    const double e2 = std::sin(xi(1)) * xi(0);
    EXPECT_NEAR(assembled.eval(xi)(0, 0), e1, 1e-12 * (1 + std::abs(e1)));
    EXPECT_NEAR(assembled.eval(xi)(1, 0), e2, 1e-12 * (1 + std::abs(e2)));
    EXPECT_NEAR(closed.eval(xi)(0, 0), e1, 1e-12 * (1 + std::abs(e1)));
    EXPECT_NEAR(closed.eval(xi)(1, 0), e2, 1e-12 * (1 + std::abs(e2)));
  }
}

TEST(FDotGradF, ZeroField) {
  const auto f2 = f_dot_grad_f(zero_field(3, 2));
  EXPECT_EQ(f2.eval(Vector::Ones(3)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(FDotGradF, MatrixLayoutForLinearFields) {
  // f(y) e_j = A_j y, so ∇f[(f e_a) ⊗ e_b] = A_b A_a y.
  std::mt19937_64 rng(32);
  const std::vector<Matrix> A{oracle::random_mat(rng, 3, 3), oracle::random_mat(rng, 3, 3)};
  const auto f2 = f_dot_grad_f(linear_field(A));
  const Vector y = oracle::random_vec(rng, 3);
  const Matrix M = f2.eval(y);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) EXPECT_LE((M.col(a * 2 + b) - A[b] * A[a] * y).cwiseAbs().maxCoeff(), 1e-13);
  const Matrix x2 = oracle::random_mat(rng, 2, 2);
  Vector expected = Vector::Zero(3);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) expected += A[b] * A[a] * y * x2(a, b);
  EXPECT_LE((f2.contract(y, x2) - expected).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(LipRemainder, LinearFieldHasNoRemainder) {
  std::mt19937_64 rng(33);
  const auto f = linear_field({oracle::random_mat(rng, 2, 2)});
  const auto rep = check_lip_remainder(f, Box::cube(2, 5.0), 2000, 1e-9);
  EXPECT_LE(rep.max_ratio, 1e-9);
  EXPECT_TRUE(rep.passed);
}

TEST(LipRemainder, CounterexampleWithEstimatedConstant) {
  const auto f = counterexample_field();
  const Box box = Box::cube(2, 5.0);
  const auto est = estimate_bounds(f, box, 20000);
  ASSERT_TRUE(est.holder.has_value());
  EXPECT_TRUE(std::isfinite(*est.holder));
  const auto rep = check_lip_remainder(f, box, 2000, *est.holder);
  EXPECT_TRUE(std::isfinite(rep.max_ratio));
  EXPECT_TRUE(rep.passed) << rep.max_ratio << " vs " << *est.holder;
}

TEST(LipRemainder, DetectsLowRegularity) {
  // |y|^{3/2}: the Taylor remainder at 0 is of order 3/2 < 2.
  const VectorField f(
      1, 1, 1, [](const Vector& y) { return Matrix::Constant(1, 1, std::pow(std::abs(y(0)), 1.5)); },
      [](const Vector& y) {
        const double s = y(0) > 0 ? 1.0 : (y(0) < 0 ? -1.0 : 0.0);
        return Gradient{Matrix::Constant(1, 1, 1.5 * s * std::sqrt(std::abs(y(0))))};
      },
      1.0);
  const auto rep = check_lip_remainder(f, Box::cube(1, 1.0), 2000, 1.0);
  EXPECT_FALSE(rep.passed);
  EXPECT_TRUE(rep.violation.has_value());
}

TEST(FiniteDiff, LinearFieldIsExact) {
  std::mt19937_64 rng(34);
  const Matrix A = oracle::random_mat(rng, 3, 3);
  const auto f = linear_field({A});
  const auto g = finite_diff_grad([&](const Vector& y) { return f.eval(y); }, oracle::random_vec(rng, 3), 1e-3);
  for (int k = 0; k < 3; ++k) EXPECT_LE((g[k] - A.col(k)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(FiniteDiff, CounterexampleAtUnitPoint) {
  const auto f = counterexample_field();
  const auto g = finite_diff_grad([&](const Vector& y) { return f.eval(y); }, v2(1.0, 0.0), 1e-5);
  EXPECT_NEAR(g[0](0, 0), 0.0, 1e-8);
  EXPECT_NEAR(g[1](0, 0), 1.0, 1e-8);
  EXPECT_NEAR(g[0](1, 0), 1.0, 1e-8);
  EXPECT_NEAR(g[1](1, 0), 0.0, 1e-8);
  const auto exact = f.grad(v2(1.0, 0.0));
  for (int k = 0; k < 2; ++k) EXPECT_LE((exact[k] - g[k]).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(FiniteDiff, SecondOrderInStep) {
  const auto f = counterexample_field();
  const Vector y = v2(0.8, 1.3);
  const auto exact = f.grad(y);
  auto err = [&](double h) {
    const auto g = finite_diff_grad([&](const Vector& z) { return f.eval(z); }, y, h);
    return std::abs(g[1](0, 0) - exact[1](0, 0));
  };
  EXPECT_NEAR(err(1e-2) / err(5e-3), 4.0, 0.1);
}

TEST(Builtins, AnalyticGradientsAgreeWithDifferences) {
  std::mt19937_64 rng(35);
  EXPECT_LE(grad_consistency(counterexample_field(), Box::cube(2, 4.0), 200), 1e-6);
  EXPECT_LE(grad_consistency(tanh_field({oracle::random_mat(rng, 2, 2), oracle::random_mat(rng, 2, 2)},
                                        {oracle::random_vec(rng, 2), oracle::random_vec(rng, 2)}),
                             Box::cube(2, 3.0), 200),
            1e-6);
}

TEST(Builtins, TanhDeclaredBoundsDominateSamples) {
  std::mt19937_64 rng(36);
  const auto f = tanh_field({oracle::random_mat(rng, 2, 2)});
  const auto est = estimate_bounds(f, Box::cube(2, 3.0), 5000);
  const auto& dec = f.bounds();
  ASSERT_TRUE(dec.sup && dec.sup_grad && dec.holder);
  EXPECT_LE(*est.sup, *dec.sup);
  EXPECT_LE(*est.sup_grad, *dec.sup_grad);
  EXPECT_LE(*est.holder, *dec.holder);
}

TEST(Builtins, LinearFieldWithOffset) {
  Matrix A(1, 1);
  A << 2.0;
  const auto f = linear_field({A}, {Vector::Constant(1, 1.0)});
  EXPECT_DOUBLE_EQ(f.eval(Vector::Constant(1, 3.0))(0, 0), 7.0);
}
