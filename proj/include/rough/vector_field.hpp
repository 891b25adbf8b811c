#pragma once

// Vector fields f : R^d -> L(R^m, R^n) with analytic gradients, and the
// second-order field f·∇f that multiplies the level-2 part of the driver.
//
// f(y) is an n x m matrix (column j is the field driven by x^j). The gradient
// is a list of d matrices, grad[k] = ∂f/∂y_k (each n x m). Norms of f(y) and
// ∇f(y) are Frobenius norms of the whole array.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rough/tensor_algebra.hpp"

namespace rough {

using Gradient = std::vector<Matrix>;

/// Declared global constants of a field (absent when unknown or infinite).
struct FieldBounds {
  std::optional<double> sup;        // ‖f‖∞
  std::optional<double> sup_grad;   // ‖∇f‖∞
  std::optional<double> holder;     // H: |f(u) - f(u') - ∇f(u')(u-u')| <= H |u-u'|^{1+γ}
};

class VectorField {
 public:
  using Eval = std::function<Matrix(const Vector&)>;
  using Grad = std::function<Gradient(const Vector&)>;

  VectorField() = default;
  VectorField(int dim_in, int dim_out, int dim_driver, Eval eval, Grad grad, double gamma = 1.0,
              FieldBounds bounds = {}, std::string name = {});

  int dim_in() const { return dim_in_; }
  int dim_out() const { return dim_out_; }
  int dim_driver() const { return dim_driver_; }
  /// State dimension for fields with dim_in == dim_out.
  int dim_state() const { return dim_in_; }
  double gamma() const { return gamma_; }
  const FieldBounds& bounds() const { return bounds_; }
  const std::string& name() const { return name_; }
  bool has_grad() const { return static_cast<bool>(grad_); }

  Matrix eval(const Vector& y) const;
  Gradient grad(const Vector& y) const;

  VectorField with_bounds(FieldBounds bounds) const;

 private:
  int dim_in_ = 0;
  int dim_out_ = 0;
  int dim_driver_ = 0;
  Eval eval_;
  Grad grad_;
  double gamma_ = 1.0;
  FieldBounds bounds_;
  std::string name_;
};

/// (f·∇f)(y) as an n x m² matrix: column a*m + b holds ∇f(y)[(f(y)e_a) ⊗ e_b],
/// so contraction with a level-2 matrix x2 is M · vec_rowmajor(x2).
class SecondOrderField {
 public:
  using Eval = std::function<Matrix(const Vector&)>;

  SecondOrderField() = default;
  SecondOrderField(int dim_in, int dim_out, int dim_driver, Eval eval);

  int dim_in() const { return dim_in_; }
  int dim_out() const { return dim_out_; }
  int dim_driver() const { return dim_driver_; }

  Matrix eval(const Vector& y) const;
  Vector contract(const Vector& y, const Matrix& level2) const;

  static SecondOrderField zero(int dim_in, int dim_out, int dim_driver);

 private:
  int dim_in_ = 0;
  int dim_out_ = 0;
  int dim_driver_ = 0;
  Eval eval_;
};

/// Assembles f·∇f from f and ∇f. Requires dim_in == dim_out.
SecondOrderField f_dot_grad_f(const VectorField& vf);

/// Column a*m + b of f·∇f from already evaluated f(y) and ∇f(y).
Matrix f_dot_grad_f_matrix(const Matrix& f, const Gradient& grad);

/// ∇f(v) applied to the pair (u, w): Σ_k u_k ∂f/∂y_k · w, an n-vector.
Vector apply_grad(const Gradient& grad, const Vector& u, const Vector& w);

/// Central differences of `eval` in each input coordinate.
Gradient finite_diff_grad(const VectorField::Eval& eval, const Vector& y, double h);

/// Axis-aligned box [lo, hi].
struct Box {
  Vector lo;
  Vector hi;
  static Box cube(int d, double half_width);
};

struct LipReport {
  double max_ratio = 0.0;
  double declared = 0.0;
  bool passed = true;
  /// A pair (u, u') with ratio above 1.05 × declared, if one was found.
  std::optional<std::pair<Vector, Vector>> violation;
};

/// Samples pairs in `box` (uniform pairs, local pairs at log-uniform
/// separations, and pairs straddling the box centre at log-uniform radii) and
/// reports sup |f(u) - f(u') - ∇f(u')(u - u')| / |u - u'|^{1+γ}. Passes iff the
/// ratio stays within 1.05 × H, where H is `declared` or the field's declared
/// holder constant.
LipReport check_lip_remainder(const VectorField& vf, const Box& box, int samples,
                              std::optional<double> declared = std::nullopt,
                              std::uint64_t seed = 7);

/// Dense random-sampling estimates of ‖f‖, ‖∇f‖ and H over a box.
FieldBounds estimate_bounds(const VectorField& vf, const Box& box, int samples = 10000,
                            std::uint64_t seed = 11);

/// Largest relative discrepancy between grad and finite_diff_grad over random
/// points in the box (relative to max(1, |grad|)).
double grad_consistency(const VectorField& vf, const Box& box, int samples, double h = 1e-5,
                        std::uint64_t seed = 13);

// Builtin fields ------------------------------------------------------------

/// Column j: A[j] y + c[j]. A[j] is n x d, c[j] has length n (empty = 0).
VectorField linear_field(const std::vector<Matrix>& A, const std::vector<Vector>& c = {});

/// f(y) = y for y in R^d driven by a scalar driver.
VectorField identity_field(int d);

VectorField zero_field(int d, int m);

/// f(ξ) = (sin(ξ2) ξ1, ξ1): linear growth, yet f·∇f is quadratic.
VectorField counterexample_field();
/// Closed form (sin²(ξ2) ξ1 + ξ1² cos(ξ2), sin(ξ2) ξ1).
SecondOrderField counterexample_second_order();

/// Column j: componentwise tanh(A[j] y + c[j]). Bounded with bounded
/// derivatives; bounds are declared.
VectorField tanh_field(const std::vector<Matrix>& A, const std::vector<Vector>& c = {});

}  // namespace rough
