#pragma once

// Log-sphere coordinates φ(z) = (z/|z|, log|z|) on R^d \ {0}, their shifted
// form ψ(y) = φ(b + y), and the fields induced on the cylinder.
//
// Points of the cylinder are packed as vectors (θ_1, ..., θ_d, ρ) of length
// d + 1. Off the unit sphere θ is read through θ/|θ|, which gives an explicit
// smooth extension of every transformed field to θ ≠ 0.

#include <cstdint>
#include <vector>

#include "rough/partial_rough_path.hpp"
#include "rough/vector_field.hpp"

namespace rough {

struct LogSphereCoords {
  Vector theta;
  double rho = 0.0;

  LogSphereCoords() = default;
  /// Renormalizes θ to the unit sphere; throws when θ = 0.
  LogSphereCoords(const Vector& theta, double rho);

  Vector packed() const;
  static LogSphereCoords from_packed(const Vector& v);
};

LogSphereCoords phi(const Vector& z);
/// exp(ρ) θ; throws std::overflow_error for |ρ| > 700.
Vector z_of(const LogSphereCoords& c);
/// z(θ, ρ) = exp(ρ) θ/|θ| on packed coordinates.
Vector z_of_packed(const Vector& packed);

/// Jacobian of φ: rows 0..d-1 are ∂θ_i/∂z_j = δ_ij/|z| - z_i z_j/|z|³, row d is
/// ∂ρ/∂z_j = z_j/|z|².
Matrix grad_phi(const Vector& z);
/// Second derivatives: entry l is ∂(grad_phi)/∂z_l.
std::vector<Matrix> hess_phi(const Vector& z);
/// Jacobian (d x (d+1)) of the extended inverse (θ, ρ) ↦ exp(ρ) θ/|θ|.
Matrix jacobian_z(const Vector& packed);

/// Projection of packed coordinates back onto |θ| = 1.
void renormalize_theta(Vector& packed);

struct ShiftedMap {
  Vector b;
  double r_min = 1.0;

  Vector psi(const Vector& y) const;
  Vector psi_inverse(const Vector& packed) const;
  Matrix grad_psi(const Vector& y) const;
  SmoothMap as_smooth_map() const;
};

/// b = (radius + |a| + 1) e_1, so that |b + y| >= 1 whenever |y| <= radius + |a|.
ShiftedMap choose_shift(const Vector& a, double predicted_radius);

/// h(θ, ρ) = ∇ψ(ψ⁻¹(θ, ρ)) f(ψ⁻¹(θ, ρ)) with its chain-rule gradient.
VectorField transformed_field(const VectorField& f, const ShiftedMap& shift);

struct TransformedFields {
  VectorField h1;
  /// ∇ψ(ψ⁻¹) (f·∇f)(ψ⁻¹): maps level-2 matrices into R^{d+1}.
  SecondOrderField h2;
};

TransformedFields h1_h2(const VectorField& f, const SecondOrderField& f_second, const ShiftedMap& shift);
TransformedFields h1_h2(const VectorField& f, const ShiftedMap& shift);

/// Random packed points with θ uniform on the sphere in R^d and ρ uniform in [rho_lo, rho_hi].
std::vector<Vector> cylinder_points(int d, double rho_lo, double rho_hi, int samples,
                                    std::uint64_t seed = 17);

}  // namespace rough
