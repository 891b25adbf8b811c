#include "rough/vector_field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace rough {

VectorField::VectorField(int dim_in, int dim_out, int dim_driver, Eval eval, Grad grad, double gamma,
                         FieldBounds bounds, std::string name)
    : dim_in_(dim_in),
      dim_out_(dim_out),
      dim_driver_(dim_driver),
      eval_(std::move(eval)),
      grad_(std::move(grad)),
      gamma_(gamma),
      bounds_(bounds),
      name_(std::move(name)) {
  if (dim_in < 1 || dim_out < 1 || dim_driver < 1) {
    throw std::invalid_argument("VectorField: dimensions must be positive");
  }
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("VectorField: gamma must lie in (0, 1]");
  }
  if (!eval_) throw std::invalid_argument("VectorField: missing evaluation");
}

Matrix VectorField::eval(const Vector& y) const {
  if (y.size() != dim_in_) throw std::invalid_argument("VectorField::eval: wrong state dimension");
  return eval_(y);
}

Gradient VectorField::grad(const Vector& y) const {
  if (!grad_) throw std::logic_error("VectorField '" + name_ + "' has no analytic gradient");
  if (y.size() != dim_in_) throw std::invalid_argument("VectorField::grad: wrong state dimension");
  return grad_(y);
}

VectorField VectorField::with_bounds(FieldBounds bounds) const {
  VectorField out = *this;
  out.bounds_ = bounds;
  return out;
}

// ---------------------------------------------------------------------------

SecondOrderField::SecondOrderField(int dim_in, int dim_out, int dim_driver, Eval eval)
    : dim_in_(dim_in), dim_out_(dim_out), dim_driver_(dim_driver), eval_(std::move(eval)) {
  if (!eval_) throw std::invalid_argument("SecondOrderField: missing evaluation");
}

Matrix SecondOrderField::eval(const Vector& y) const { return eval_(y); }

Vector SecondOrderField::contract(const Vector& y, const Matrix& level2) const {
  return eval_(y) * flatten_row_major(level2);
}

SecondOrderField SecondOrderField::zero(int dim_in, int dim_out, int dim_driver) {
  return {dim_in, dim_out, dim_driver,
          [dim_out, dim_driver](const Vector&) {
            return Matrix::Zero(dim_out, dim_driver * dim_driver).eval();
          }};
}

Matrix f_dot_grad_f_matrix(const Matrix& f, const Gradient& grad) {
  const auto n = f.rows();
  const auto m = f.cols();
  Matrix out = Matrix::Zero(n, m * m);
  for (Eigen::Index a = 0; a < m; ++a) {
    for (std::size_t k = 0; k < grad.size(); ++k) {
      const double fa = f(static_cast<Eigen::Index>(k), a);
      if (fa == 0.0) continue;
      out.middleCols(a * m, m) += fa * grad[k];
    }
  }
  return out;
}

SecondOrderField f_dot_grad_f(const VectorField& vf) {
  if (vf.dim_in() != vf.dim_out()) {
    throw std::invalid_argument("f_dot_grad_f: field must map R^d to L(R^m, R^d)");
  }
  if (!vf.has_grad()) throw std::invalid_argument("f_dot_grad_f: field has no gradient");
  return {vf.dim_in(), vf.dim_out(), vf.dim_driver(),
          [vf](const Vector& y) { return f_dot_grad_f_matrix(vf.eval(y), vf.grad(y)); }};
}

Vector apply_grad(const Gradient& grad, const Vector& u, const Vector& w) {
  Vector out = Vector::Zero(grad.front().rows());
  for (std::size_t k = 0; k < grad.size(); ++k) out += u(static_cast<Eigen::Index>(k)) * (grad[k] * w);
  return out;
}

Gradient finite_diff_grad(const VectorField::Eval& eval, const Vector& y, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_diff_grad: step must be positive");
  Gradient out;
  out.reserve(static_cast<std::size_t>(y.size()));
  Vector yp = y, ym = y;
  for (Eigen::Index k = 0; k < y.size(); ++k) {
    yp(k) = y(k) + h;
    ym(k) = y(k) - h;
    out.push_back((eval(yp) - eval(ym)) / (2.0 * h));
    yp(k) = ym(k) = y(k);
  }
  return out;
}

Box Box::cube(int d, double half_width) {
  return {Vector::Constant(d, -half_width), Vector::Constant(d, half_width)};
}

namespace {

double grad_norm(const Gradient& g) {
  double s = 0.0;
  for (const auto& m : g) s += m.squaredNorm();
  return std::sqrt(s);
}

Matrix directional(const Gradient& g, const Vector& v) {
  Matrix out = Matrix::Zero(g.front().rows(), g.front().cols());
  for (std::size_t k = 0; k < g.size(); ++k) out += v(static_cast<Eigen::Index>(k)) * g[k];
  return out;
}

class BoxSampler {
 public:
  BoxSampler(const Box& box, std::uint64_t seed) : box_(box), rng_(seed) {}

  Vector uniform() {
    Vector v(box_.lo.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = box_.lo(i) + (box_.hi(i) - box_.lo(i)) * unit_(rng_);
    return v;
  }
  Vector direction() {
    Vector v(box_.lo.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = normal_(rng_);
    const double n = v.norm();
    return n > 0.0 ? Vector(v / n) : direction();
  }
  /// Log-uniform in [10^lo_exp, 10^hi_exp].
  double log_uniform(double lo_exp, double hi_exp) {
    return std::pow(10.0, lo_exp + (hi_exp - lo_exp) * unit_(rng_));
  }
  Vector clamp(const Vector& v) const { return v.cwiseMax(box_.lo).cwiseMin(box_.hi); }
  Vector centre() const { return 0.5 * (box_.lo + box_.hi); }
  double width() const { return (box_.hi - box_.lo).norm(); }

 private:
  const Box& box_;
  std::mt19937_64 rng_;
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

double remainder_ratio(const VectorField& vf, const Vector& u, const Vector& v) {
  const Vector d = u - v;
  const double dist = d.norm();
  if (!(dist > 0.0)) return 0.0;
  const Matrix fu = vf.eval(u), fv = vf.eval(v), lin = directional(vf.grad(v), d);
  const Matrix rem = fu - fv - lin;
  // Cancellation noise in the three terms is not a remainder.
  const double noise = 16.0 * std::numeric_limits<double>::epsilon() * (fu.norm() + fv.norm() + lin.norm());
  if (rem.norm() <= noise) return 0.0;
  return rem.norm() / std::pow(dist, 1.0 + vf.gamma());
}

}  // namespace

LipReport check_lip_remainder(const VectorField& vf, const Box& box, int samples,
                              std::optional<double> declared, std::uint64_t seed) {
  if (!declared) declared = vf.bounds().holder;
  if (!declared) throw std::invalid_argument("check_lip_remainder: no Hölder constant declared");
  BoxSampler sampler(box, seed);
  const double width = sampler.width();
  LipReport report;
  report.declared = *declared;
  for (int s = 0; s < samples; ++s) {
    Vector u, v;
    switch (s % 3) {
      case 0:
        u = sampler.uniform();
        v = sampler.uniform();
        break;
      case 1:
        v = sampler.uniform();
        u = sampler.clamp(v + sampler.log_uniform(-6.0, 0.0) * width * sampler.direction());
        break;
      default: {
        const double r = sampler.log_uniform(-8.0, 0.0) * width;
        v = sampler.clamp(sampler.centre() + r * sampler.direction());
        u = sampler.clamp(sampler.centre() + r * sampler.direction());
        break;
      }
    }
    const double ratio = remainder_ratio(vf, u, v);
    if (ratio > report.max_ratio) {
      report.max_ratio = ratio;
      if (ratio > 1.05 * *declared) report.violation = std::make_pair(u, v);
    }
  }
  report.passed = !report.violation.has_value();
  return report;
}

FieldBounds estimate_bounds(const VectorField& vf, const Box& box, int samples, std::uint64_t seed) {
  BoxSampler sampler(box, seed);
  const double width = sampler.width();
  double sup = 0.0, sup_grad = 0.0, holder = 0.0;
  for (int s = 0; s < samples; ++s) {
    const Vector v = sampler.uniform();
    sup = std::max(sup, vf.eval(v).norm());
    if (vf.has_grad()) {
      sup_grad = std::max(sup_grad, grad_norm(vf.grad(v)));
      const Vector u = (s % 2 == 0)
                           ? sampler.uniform()
                           : sampler.clamp(v + sampler.log_uniform(-4.0, 0.0) * width * sampler.direction());
      holder = std::max(holder, remainder_ratio(vf, u, v));
    }
  }
  FieldBounds out;
  out.sup = sup;
  if (vf.has_grad()) {
    out.sup_grad = sup_grad;
    out.holder = holder;
  }
  return out;
}

double grad_consistency(const VectorField& vf, const Box& box, int samples, double h,
                        std::uint64_t seed) {
  BoxSampler sampler(box, seed);
  double worst = 0.0;
  const auto eval = [&vf](const Vector& y) { return vf.eval(y); };
  for (int s = 0; s < samples; ++s) {
    const Vector y = sampler.uniform();
    const Gradient exact = vf.grad(y);
    const Gradient fd = finite_diff_grad(eval, y, h);
    const double scale = std::max(1.0, grad_norm(exact));
    double err = 0.0;
    for (std::size_t k = 0; k < exact.size(); ++k) err = std::max(err, (exact[k] - fd[k]).cwiseAbs().maxCoeff());
    worst = std::max(worst, err / scale);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Builtins

VectorField linear_field(const std::vector<Matrix>& A, const std::vector<Vector>& c) {
  if (A.empty()) throw std::invalid_argument("linear_field: need at least one driver column");
  const auto n = static_cast<int>(A.front().rows());
  const auto d = static_cast<int>(A.front().cols());
  const auto m = static_cast<int>(A.size());
  std::vector<Vector> offsets(A.size(), Vector::Zero(n));
  for (std::size_t j = 0; j < A.size(); ++j) {
    if (A[j].rows() != n || A[j].cols() != d) throw std::invalid_argument("linear_field: shape mismatch");
    if (j < c.size() && c[j].size() > 0) {
      if (c[j].size() != n) throw std::invalid_argument("linear_field: offset length mismatch");
      offsets[j] = c[j];
    }
  }
  Gradient grad(static_cast<std::size_t>(d), Matrix(n, m));
  double grad_sq = 0.0;
  for (int k = 0; k < d; ++k) {
    for (int j = 0; j < m; ++j) grad[k].col(j) = A[j].col(k);
    grad_sq += grad[k].squaredNorm();
  }
  FieldBounds bounds;
  bounds.sup_grad = std::sqrt(grad_sq);
  bounds.holder = 0.0;
  return {d,
          n,
          m,
          [A, offsets, n, m](const Vector& y) {
            Matrix out(n, m);
            for (int j = 0; j < m; ++j) out.col(j) = A[j] * y + offsets[j];
            return out;
          },
          [grad](const Vector&) { return grad; },
          1.0,
          bounds,
          "linear"};
}

VectorField identity_field(int d) {
  VectorField f = linear_field({Matrix::Identity(d, d)});
  return {d, d, 1, [](const Vector& y) { return Matrix(y); },
          [f](const Vector& y) { return f.grad(y); }, 1.0, f.bounds(), "identity"};
}

VectorField zero_field(int d, int m) {
  FieldBounds bounds;
  bounds.sup = 0.0;
  bounds.sup_grad = 0.0;
  bounds.holder = 0.0;
  return {d,
          d,
          m,
          [d, m](const Vector&) { return Matrix::Zero(d, m).eval(); },
          [d, m](const Vector&) { return Gradient(static_cast<std::size_t>(d), Matrix::Zero(d, m)); },
          1.0,
          bounds,
          "zero"};
}

VectorField counterexample_field() {
  return {2,
          2,
          1,
          [](const Vector& y) {
            Matrix out(2, 1);
            out << std::sin(y(1)) * y(0), y(0);
            return out;
          },
          [](const Vector& y) {
            Gradient g(2, Matrix(2, 1));
            g[0] << std::sin(y(1)), 1.0;
            g[1] << y(0) * std::cos(y(1)), 0.0;
            return g;
          },
          1.0,
          {},
          "counterexample"};
}

SecondOrderField counterexample_second_order() {
  return {2, 2, 1, [](const Vector& y) {
            const double s = std::sin(y(1));
            Matrix out(2, 1);
            out << s * s * y(0) + y(0) * y(0) * std::cos(y(1)), s * y(0);
            return out;
          }};
}

VectorField tanh_field(const std::vector<Matrix>& A, const std::vector<Vector>& c) {
  if (A.empty()) throw std::invalid_argument("tanh_field: need at least one driver column");
  const auto n = static_cast<int>(A.front().rows());
  const auto d = static_cast<int>(A.front().cols());
  const auto m = static_cast<int>(A.size());
  std::vector<Vector> offsets(A.size(), Vector::Zero(n));
  double grad_sq = 0.0, row4 = 0.0;
  for (std::size_t j = 0; j < A.size(); ++j) {
    if (A[j].rows() != n || A[j].cols() != d) throw std::invalid_argument("tanh_field: shape mismatch");
    if (j < c.size() && c[j].size() > 0) offsets[j] = c[j];
    grad_sq += A[j].squaredNorm();
    for (int i = 0; i < n; ++i) row4 += std::pow(A[j].row(i).squaredNorm(), 2);
  }
  FieldBounds bounds;
  bounds.sup = std::sqrt(static_cast<double>(n * m));
  bounds.sup_grad = std::sqrt(grad_sq);
  // Each component's Taylor remainder is at most max|tanh''| / 2 · |a_i|² |δ|².
  bounds.holder = 2.0 / (3.0 * std::sqrt(3.0)) * std::sqrt(row4);
  return {d,
          n,
          m,
          [A, offsets, n, m](const Vector& y) {
            Matrix out(n, m);
            for (int j = 0; j < m; ++j) out.col(j) = (A[j] * y + offsets[j]).array().tanh().matrix();
            return out;
          },
          [A, offsets, n, d, m](const Vector& y) {
            Gradient g(static_cast<std::size_t>(d), Matrix(n, m));
            for (int j = 0; j < m; ++j) {
              const Eigen::ArrayXd t = (A[j] * y + offsets[j]).array().tanh();
              const Eigen::ArrayXd sech2 = 1.0 - t * t;
              for (int k = 0; k < d; ++k) g[k].col(j) = (sech2 * A[j].col(k).array()).matrix();
            }
            return g;
          },
          1.0,
          bounds,
          "tanh"};
}

}  // namespace rough
