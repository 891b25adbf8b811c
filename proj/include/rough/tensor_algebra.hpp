#pragma once

// Level-2 truncated tensor algebra T2(R^m) = R + R^m + (R^m ⊗ R^m) and the
// group of its elements with unit scalar part.
//
// Level-2 tensors are stored as dense m x m matrices; entry (i, j) is the
// coefficient of e_i ⊗ e_j. Where a flat layout is needed (CSV rows,
// second-order field contractions) the row-major order i * m + j is used.

#include <Eigen/Dense>

namespace rough {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// General element (scalar, level1, level2) of T2(R^m).
struct Tensor2 {
  double scalar = 0.0;
  Vector level1;
  Matrix level2;

  Tensor2() = default;
  Tensor2(double s, Vector l1, Matrix l2);

  static Tensor2 zero(int m);
  static Tensor2 unit(int m);

  int dim() const { return static_cast<int>(level1.size()); }
  bool all_finite() const;
};

/// Truncated product: degree-3 and higher terms are dropped.
Tensor2 operator*(const Tensor2& a, const Tensor2& b);
Tensor2 operator+(const Tensor2& a, const Tensor2& b);
Tensor2 operator-(const Tensor2& a, const Tensor2& b);
Tensor2 operator*(double c, const Tensor2& a);

/// Largest absolute entry difference over all three degrees.
double max_abs_diff(const Tensor2& a, const Tensor2& b);

/// Element (1, a1, a2) of the level-2 signature group.
class GroupElement2 {
 public:
  GroupElement2() = default;
  GroupElement2(Vector level1, Matrix level2);

  static GroupElement2 identity(int m);
  /// Signature of the straight segment with increment v: (1, v, v⊗v / 2).
  static GroupElement2 segment(const Vector& v);
  /// Rejects tensors whose scalar part is not exactly 1.
  static GroupElement2 from_tensor(const Tensor2& t);

  int dim() const { return static_cast<int>(level1_.size()); }
  const Vector& level1() const { return level1_; }
  const Matrix& level2() const { return level2_; }
  Tensor2 as_tensor() const { return {1.0, level1_, level2_}; }

 private:
  Vector level1_;
  Matrix level2_;
};

GroupElement2 mul(const GroupElement2& a, const GroupElement2& b);
/// (1, u, b)^-1 = (1, -u, u⊗u - b).
GroupElement2 inv(const GroupElement2& a);
/// x_{s,t} = x_s^-1 ⊗ x_t.
GroupElement2 increment(const GroupElement2& x_s, const GroupElement2& x_t);

Matrix sym_part(const Matrix& level2);
Matrix antisym_part(const Matrix& level2);
inline Matrix sym_part(const Tensor2& a) { return sym_part(a.level2); }
inline Matrix antisym_part(const Tensor2& a) { return antisym_part(a.level2); }

/// Homogeneous norm max(|a1|_2, sqrt(|a2|_F)).
double hom_norm(const GroupElement2& a);

double max_abs_diff(const GroupElement2& a, const GroupElement2& b);

/// Row-major flattening of an m x m level-2 matrix.
Vector flatten_row_major(const Matrix& level2);

}  // namespace rough
