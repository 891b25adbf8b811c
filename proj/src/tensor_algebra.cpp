#include "rough/tensor_algebra.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace rough {

namespace {

void require_same_dim(int a, int b, const char* where) {
  if (a != b) {
    throw std::invalid_argument(std::string(where) + ": dimension mismatch (" +
                                std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
}

void require_square(const Vector& l1, const Matrix& l2) {
  if (l2.rows() != l1.size() || l2.cols() != l1.size()) {
    throw std::invalid_argument("level2 must be an m x m matrix matching level1");
  }
}

}  // namespace

Tensor2::Tensor2(double s, Vector l1, Matrix l2)
    : scalar(s), level1(std::move(l1)), level2(std::move(l2)) {
  require_square(level1, level2);
}

Tensor2 Tensor2::zero(int m) { return {0.0, Vector::Zero(m), Matrix::Zero(m, m)}; }

Tensor2 Tensor2::unit(int m) { return {1.0, Vector::Zero(m), Matrix::Zero(m, m)}; }

bool Tensor2::all_finite() const {
  return std::isfinite(scalar) && level1.allFinite() && level2.allFinite();
}

Tensor2 operator*(const Tensor2& a, const Tensor2& b) {
  require_same_dim(a.dim(), b.dim(), "Tensor2 product");
  Tensor2 r;
  r.scalar = a.scalar * b.scalar;
  r.level1 = a.scalar * b.level1 + b.scalar * a.level1;
  r.level2 = a.scalar * b.level2 + b.scalar * a.level2 + a.level1 * b.level1.transpose();
  return r;
}

Tensor2 operator+(const Tensor2& a, const Tensor2& b) {
  require_same_dim(a.dim(), b.dim(), "Tensor2 sum");
  return {a.scalar + b.scalar, a.level1 + b.level1, a.level2 + b.level2};
}

Tensor2 operator-(const Tensor2& a, const Tensor2& b) {
  require_same_dim(a.dim(), b.dim(), "Tensor2 difference");
  return {a.scalar - b.scalar, a.level1 - b.level1, a.level2 - b.level2};
}

Tensor2 operator*(double c, const Tensor2& a) { return {c * a.scalar, c * a.level1, c * a.level2}; }

double max_abs_diff(const Tensor2& a, const Tensor2& b) {
  require_same_dim(a.dim(), b.dim(), "max_abs_diff");
  double d = std::abs(a.scalar - b.scalar);
  if (a.dim() > 0) {
    d = std::max(d, (a.level1 - b.level1).cwiseAbs().maxCoeff());
    d = std::max(d, (a.level2 - b.level2).cwiseAbs().maxCoeff());
  }
  return d;
}

GroupElement2::GroupElement2(Vector level1, Matrix level2)
    : level1_(std::move(level1)), level2_(std::move(level2)) {
  require_square(level1_, level2_);
}

GroupElement2 GroupElement2::identity(int m) { return {Vector::Zero(m), Matrix::Zero(m, m)}; }

GroupElement2 GroupElement2::segment(const Vector& v) { return {v, 0.5 * v * v.transpose()}; }

GroupElement2 GroupElement2::from_tensor(const Tensor2& t) {
  if (t.scalar != 1.0) {
    throw std::invalid_argument("group elements must have scalar part exactly 1");
  }
  return {t.level1, t.level2};
}

GroupElement2 mul(const GroupElement2& a, const GroupElement2& b) {
  require_same_dim(a.dim(), b.dim(), "mul");
  return {a.level1() + b.level1(),
          a.level2() + b.level2() + a.level1() * b.level1().transpose()};
}

GroupElement2 inv(const GroupElement2& a) {
  return {-a.level1(), a.level1() * a.level1().transpose() - a.level2()};
}

GroupElement2 increment(const GroupElement2& x_s, const GroupElement2& x_t) {
  require_same_dim(x_s.dim(), x_t.dim(), "increment");
  // Expanded form of inv(x_s) * x_t; avoids forming the inverse.
  Vector d = x_t.level1() - x_s.level1();
  return {d, x_t.level2() - x_s.level2() - x_s.level1() * d.transpose()};
}

Matrix sym_part(const Matrix& level2) { return 0.5 * (level2 + level2.transpose()); }

Matrix antisym_part(const Matrix& level2) { return 0.5 * (level2 - level2.transpose()); }

double hom_norm(const GroupElement2& a) {
  return std::max(a.level1().norm(), std::sqrt(a.level2().norm()));
}

double max_abs_diff(const GroupElement2& a, const GroupElement2& b) {
  return max_abs_diff(a.as_tensor(), b.as_tensor());
}

Vector flatten_row_major(const Matrix& level2) {
  const Eigen::Index m = level2.rows();
  Vector out(m * level2.cols());
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < level2.cols(); ++j) out(i * level2.cols() + j) = level2(i, j);
  }
  return out;
}

}  // namespace rough
