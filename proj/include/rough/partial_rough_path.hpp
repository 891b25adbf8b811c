#pragma once

// Partial rough paths (x, y, ∫dy⊗dx): a rough driver x, an output path y and
// the cross-iterated integral
//
//     cross(s,t) = ∫_s^t (y_r - y_s) ⊗ dx_r        (d x m)
//
// which is additive in the sense
//
//     cross(s,t) = cross(s,r) + cross(r,t) + (y_r - y_s) ⊗ (x_t - x_r).
//
// Only the consecutive-cell values are supplied; they are accumulated into
// C_k = cross(t_0, t_k) and arbitrary pairs are recovered from
// cross(i,j) = C_j - C_i - (y_i - y_0) ⊗ (x_j - x_i), so the identity above
// holds to rounding on every triple.

#include <functional>
#include <vector>

#include "rough/rough_path.hpp"
#include "rough/sewing.hpp"
#include "rough/vector_field.hpp"

namespace rough {

/// (w, x, c) with product (w + w', x + x', c + c' + w ⊗ x'): the algebra in
/// which increments of (y, x, ∫dy⊗dx) compose.
struct CrossElement {
  Vector w;
  Vector x;
  Matrix cross;

  static CrossElement zero(int n, int m);
};

CrossElement operator*(const CrossElement& a, const CrossElement& b);

struct CrossAlgebra {
  using Element = CrossElement;
  Element multiply(const Element& a, const Element& b) const { return a * b; }
  Vector flatten(const Element& a) const;
  Element unflatten(const Vector& v, const Element& like) const;
};

class PartialRoughPath {
 public:
  PartialRoughPath() = default;
  /// `y` holds one point per grid time; `cell_cross[k]` is cross(t_k, t_{k+1}).
  PartialRoughPath(RoughPath driver, std::vector<Vector> y, const std::vector<Matrix>& cell_cross,
                   double p);

  int dim_y() const { return dim_y_; }
  int dim_x() const { return driver_.dim(); }
  std::size_t size() const { return driver_.size(); }
  const std::vector<double>& times() const { return driver_.times(); }
  const RoughPath& driver() const { return driver_; }
  double p() const { return p_; }

  const Vector& y(std::size_t k) const { return y_[k]; }
  const std::vector<Vector>& y_values() const { return y_; }
  Vector y_increment(std::size_t i, std::size_t j) const { return y_[j] - y_[i]; }
  Vector x_increment(std::size_t i, std::size_t j) const { return driver_.level1_increment(i, j); }
  Matrix cross(std::size_t i, std::size_t j) const;
  CrossElement element(std::size_t i, std::size_t j) const;

  /// Largest entry of cross(s,t) - cross(s,r) - cross(r,t) - (y_r - y_s)⊗(x_t - x_r)
  /// over grid triples (strided sub-grid for long paths).
  double additivity_defect(ScanOptions opts = {}) const;

  /// Fitted L in |cross(s,t)|_F <= L ω(s,t)^{2/p} over all grid pairs.
  double cross_constant() const;

 private:
  RoughPath driver_;
  std::vector<Vector> y_;
  std::vector<Matrix> prefix_;
  double p_ = 2.0;
  int dim_y_ = 0;
};

/// max over grid pairs of |Δx^a - Δx^b| / ω^{1/p}, |Δy^a - Δy^b| / ω^{1/p} and
/// |cross^a - cross^b|_F / ω^{2/p}. Requires identical grids and dimensions.
double pvar_distance(const PartialRoughPath& a, const PartialRoughPath& b);

/// Smooth map φ : R^d -> R^w with Jacobian (w x d).
struct SmoothMap {
  int dim_in = 0;
  int dim_out = 0;
  std::function<Vector(const Vector&)> value;
  std::function<Matrix(const Vector&)> jacobian;
};

SmoothMap affine_map(const Matrix& A, const Vector& c);

/// Sewing layout for operations that build a new partial rough path from
/// grid data: the output lives on every `stride`-th grid point (plus the last)
/// and each coarse cell is sewn over index-dyadic sub-cells of the input grid.
/// stride = 1 keeps the input grid and uses the cell germ unchanged.
struct GridSewOptions {
  std::size_t stride = 1;
  SewOptions sew;
};

struct GridSewDiagnostics {
  int max_level = 0;
  /// Least-squares slope of log|z_{s,t} - z_{s,u} z_{u,t}| against log ω(s,t)
  /// on nested dyadic sub-cells of the coarse cell with the largest defect
  /// (NaN when the germ is multiplicative there).
  double defect_exponent = 0.0;
};

struct PushforwardResult {
  PartialRoughPath path;
  GridSewDiagnostics diagnostics;
};

/// (x, φ(y), ∫dφ(y)⊗dx) from the germ
/// z(s,t) = (φ(y_t) - φ(y_s), x_t - x_s, ∇φ(y_s)·cross(s,t)).
PushforwardResult pushforward(const PartialRoughPath& prp, const SmoothMap& phi,
                              const GridSewOptions& opts = {});

/// ∫ g(y) dx for g : R^d -> L(R^m, R^n), returned as the partial rough path
/// (x, I, ∫dI⊗dx) with I_0 = 0, sewn from
/// z(s,t) = (g(y_s)Δx + ∇g(y_s)[cross(s,t)], Δx, g(y_s)·x2(s,t)).
PushforwardResult rough_integral_along(const PartialRoughPath& prp, const VectorField& g,
                                       const GridSewOptions& opts = {});

/// Triple for the geometric driver x̂ = x - β: y unchanged, level2 of the
/// driver reduced by β and
///     cross_hat(s,t) = cross(s,t) - ∫_s^t f(y_r) dβ_r
/// where (f dβ)_{ib} = Σ_a f_{ia} dβ_{ab} is a Young integral on the grid.
/// `beta` must live on the grid of `prp`.
PartialRoughPath cross_against_decomposition(const PartialRoughPath& prp, const AreaDrift& beta,
                                             const VectorField& f, const SewOptions& opts = {});

}  // namespace rough
