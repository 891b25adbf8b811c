#include "rough/log_sphere.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace rough {

namespace {

constexpr double kMaxRho = 700.0;

Vector unit(const Vector& theta) {
  const double n = theta.norm();
  if (!(n > 0.0)) throw std::domain_error("log-sphere coordinates: theta must be nonzero");
  return theta / n;
}

}  // namespace

LogSphereCoords::LogSphereCoords(const Vector& theta_in, double rho_in)
    : theta(unit(theta_in)), rho(rho_in) {}

Vector LogSphereCoords::packed() const {
  Vector v(theta.size() + 1);
  v.head(theta.size()) = theta;
  v(theta.size()) = rho;
  return v;
}

LogSphereCoords LogSphereCoords::from_packed(const Vector& v) {
  return {v.head(v.size() - 1), v(v.size() - 1)};
}

LogSphereCoords phi(const Vector& z) {
  const double r = z.norm();
  if (!(r > 0.0)) throw std::domain_error("phi: z must be nonzero");
  return {z / r, std::log(r)};
}

Vector z_of(const LogSphereCoords& c) {
  if (std::abs(c.rho) > kMaxRho) throw std::overflow_error("z_of: |rho| exceeds 700");
  return std::exp(c.rho) * c.theta;
}

Vector z_of_packed(const Vector& packed) { return z_of(LogSphereCoords::from_packed(packed)); }

Matrix grad_phi(const Vector& z) {
  const auto d = z.size();
  const double r = z.norm();
  if (!(r > 0.0)) throw std::domain_error("grad_phi: z must be nonzero");
  Matrix J(d + 1, d);
  J.topRows(d) = Matrix::Identity(d, d) / r - z * z.transpose() / (r * r * r);
  J.row(d) = z.transpose() / (r * r);
  return J;
}

std::vector<Matrix> hess_phi(const Vector& z) {
  const auto d = z.size();
  const double r = z.norm();
  if (!(r > 0.0)) throw std::domain_error("hess_phi: z must be nonzero");
  const double r2 = r * r, r3 = r2 * r, r4 = r2 * r2, r5 = r4 * r;
  std::vector<Matrix> out(static_cast<std::size_t>(d), Matrix(d + 1, d));
  for (Eigen::Index l = 0; l < d; ++l) {
    Matrix& H = out[static_cast<std::size_t>(l)];
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) {
        const double dij = i == j ? 1.0 : 0.0, dil = i == l ? 1.0 : 0.0, djl = j == l ? 1.0 : 0.0;
        H(i, j) = -dij * z(l) / r3 - (dil * z(j) + djl * z(i)) / r3 + 3.0 * z(i) * z(j) * z(l) / r5;
      }
    }
    for (Eigen::Index j = 0; j < d; ++j) {
      H(d, j) = (j == l ? 1.0 : 0.0) / r2 - 2.0 * z(j) * z(l) / r4;
    }
  }
  return out;
}

Matrix jacobian_z(const Vector& packed) {
  const auto d = packed.size() - 1;
  const Vector theta = packed.head(d);
  const double rho = packed(d);
  if (std::abs(rho) > kMaxRho) throw std::overflow_error("jacobian_z: |rho| exceeds 700");
  const double n = theta.norm();
  if (!(n > 0.0)) throw std::domain_error("jacobian_z: theta must be nonzero");
  const double e = std::exp(rho);
  Matrix Y(d, d + 1);
  Y.leftCols(d) = e * (Matrix::Identity(d, d) / n - theta * theta.transpose() / (n * n * n));
  Y.col(d) = e * theta / n;
  return Y;
}

void renormalize_theta(Vector& packed) {
  const auto d = packed.size() - 1;
  packed.head(d) = unit(packed.head(d));
}

Vector ShiftedMap::psi(const Vector& y) const { return phi(b + y).packed(); }

Vector ShiftedMap::psi_inverse(const Vector& packed) const { return z_of_packed(packed) - b; }

Matrix ShiftedMap::grad_psi(const Vector& y) const { return grad_phi(b + y); }

SmoothMap ShiftedMap::as_smooth_map() const {
  const ShiftedMap self = *this;
  const int d = static_cast<int>(b.size());
  return {d, d + 1, [self](const Vector& y) { return self.psi(y); },
          [self](const Vector& y) { return self.grad_psi(y); }};
}

ShiftedMap choose_shift(const Vector& a, double predicted_radius) {
  if (!(predicted_radius >= 0.0)) throw std::invalid_argument("choose_shift: radius must be >= 0");
  ShiftedMap s;
  s.b = Vector::Zero(a.size());
  s.b(0) = predicted_radius + a.norm() + 1.0;
  s.r_min = 1.0;
  return s;
}

VectorField transformed_field(const VectorField& f, const ShiftedMap& shift) {
  if (f.dim_in() != f.dim_out() || f.dim_in() != shift.b.size()) {
    throw std::invalid_argument("transformed_field: field and shift dimensions differ");
  }
  const int d = f.dim_in(), m = f.dim_driver();
  const Vector b = shift.b;
  auto eval = [f, b](const Vector& packed) -> Matrix {
    const Vector w = z_of_packed(packed);
    return grad_phi(w) * f.eval(w - b);
  };
  VectorField::Grad grad;
  if (f.has_grad()) {
    grad = [f, b, d, m](const Vector& packed) -> Gradient {
      const Vector w = z_of_packed(packed);
      const Vector y = w - b;
      const Matrix J = grad_phi(w);
      const auto H = hess_phi(w);
      const Matrix F = f.eval(y);
      const Gradient G = f.grad(y);
      const Matrix Y = jacobian_z(packed);
      // ∂h/∂w_l = (∂J/∂w_l) F + J ∂f/∂y_l, then chained through ∂w/∂z.
      std::vector<Matrix> dw(static_cast<std::size_t>(d));
      for (int l = 0; l < d; ++l) dw[l] = H[l] * F + J * G[l];
      Gradient out(static_cast<std::size_t>(d + 1), Matrix::Zero(d + 1, m));
      for (int k = 0; k <= d; ++k) {
        for (int l = 0; l < d; ++l) out[k] += Y(l, k) * dw[l];
      }
      return out;
    };
  }
  return {d + 1, d + 1, m, std::move(eval), std::move(grad), f.gamma(), {}, "log-sphere(" + f.name() + ")"};
}

TransformedFields h1_h2(const VectorField& f, const SecondOrderField& f_second, const ShiftedMap& shift) {
  const int d = f.dim_in(), m = f.dim_driver();
  const Vector b = shift.b;
  SecondOrderField h2(d + 1, d + 1, m, [f_second, b](const Vector& packed) -> Matrix {
    const Vector w = z_of_packed(packed);
    return grad_phi(w) * f_second.eval(w - b);
  });
  return {transformed_field(f, shift), std::move(h2)};
}

TransformedFields h1_h2(const VectorField& f, const ShiftedMap& shift) {
  return h1_h2(f, f_dot_grad_f(f), shift);
}

std::vector<Vector> cylinder_points(int d, double rho_lo, double rho_hi, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uni(rho_lo, rho_hi);
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(samples));
  while (static_cast<int>(out.size()) < samples) {
    Vector theta(d);
    for (int i = 0; i < d; ++i) theta(i) = normal(rng);
    if (theta.norm() == 0.0) continue;
    out.push_back(LogSphereCoords(theta, uni(rng)).packed());
  }
  return out;
}

}  // namespace rough
