#include "rough/partial_rough_path.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rough {

CrossElement CrossElement::zero(int n, int m) {
  return {Vector::Zero(n), Vector::Zero(m), Matrix::Zero(n, m)};
}

CrossElement operator*(const CrossElement& a, const CrossElement& b) {
  return {a.w + b.w, a.x + b.x, a.cross + b.cross + a.w * b.x.transpose()};
}

Vector CrossAlgebra::flatten(const Element& a) const {
  const auto n = a.w.size(), m = a.x.size();
  Vector v(n + m + n * m);
  v.head(n) = a.w;
  v.segment(n, m) = a.x;
  v.tail(n * m) = Eigen::Map<const Vector>(a.cross.data(), n * m);
  return v;
}

CrossAlgebra::Element CrossAlgebra::unflatten(const Vector& v, const Element& like) const {
  const auto n = like.w.size(), m = like.x.size();
  return {v.head(n), v.segment(n, m), Eigen::Map<const Matrix>(v.tail(n * m).data(), n, m)};
}

// ---------------------------------------------------------------------------

PartialRoughPath::PartialRoughPath(RoughPath driver, std::vector<Vector> y,
                                   const std::vector<Matrix>& cell_cross, double p)
    : driver_(std::move(driver)), y_(std::move(y)), p_(p) {
  const std::size_t n = driver_.size();
  if (y_.size() != n || cell_cross.size() + 1 != n) {
    throw std::invalid_argument("PartialRoughPath: y needs one point per time, cross one value per cell");
  }
  if (!(p >= 1.0)) throw std::invalid_argument("PartialRoughPath: p must be >= 1");
  dim_y_ = static_cast<int>(y_.front().size());
  const int m = driver_.dim();
  prefix_.reserve(n);
  prefix_.push_back(Matrix::Zero(dim_y_, m));
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (y_[k + 1].size() != dim_y_ || cell_cross[k].rows() != dim_y_ || cell_cross[k].cols() != m) {
      throw std::invalid_argument("PartialRoughPath: inconsistent dimensions at cell " + std::to_string(k));
    }
    // C_{k+1} = C_k + cross(k, k+1) + (y_k - y_0) ⊗ (x_{k+1} - x_k)
    prefix_.push_back(prefix_.back() + cell_cross[k] +
                      (y_[k] - y_[0]) * x_increment(k, k + 1).transpose());
  }
}

Matrix PartialRoughPath::cross(std::size_t i, std::size_t j) const {
  return prefix_[j] - prefix_[i] - (y_[i] - y_[0]) * x_increment(i, j).transpose();
}

CrossElement PartialRoughPath::element(std::size_t i, std::size_t j) const {
  return {y_increment(i, j), x_increment(i, j), cross(i, j)};
}

double PartialRoughPath::additivity_defect(ScanOptions opts) const {
  const auto idx = strided_indices(size(), opts.max_points);
  double worst = 0.0;
  for (std::size_t a = 0; a < idx.size(); ++a) {
    for (std::size_t c = a + 2; c < idx.size(); ++c) {
      const Matrix whole = cross(idx[a], idx[c]);
      for (std::size_t b = a + 1; b < c; ++b) {
        const Matrix split = cross(idx[a], idx[b]) + cross(idx[b], idx[c]) +
                             y_increment(idx[a], idx[b]) * x_increment(idx[b], idx[c]).transpose();
        worst = std::max(worst, (whole - split).cwiseAbs().maxCoeff());
      }
    }
  }
  return worst;
}

double PartialRoughPath::cross_constant() const {
  const auto& t = times();
  const Control& omega = driver_.control();
  double best = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    for (std::size_t j = i + 1; j < size(); ++j) {
      const double c = cross(i, j).norm();
      if (c == 0.0) continue;
      const double w = omega(t[i], t[j]);
      if (!(w > 0.0)) return std::numeric_limits<double>::infinity();
      best = std::max(best, c / std::pow(w, 2.0 / p_));
    }
  }
  return best;
}

double pvar_distance(const PartialRoughPath& a, const PartialRoughPath& b) {
  if (a.times() != b.times() || a.dim_x() != b.dim_x() || a.dim_y() != b.dim_y()) {
    throw std::invalid_argument("pvar_distance: partial rough paths live on different grids");
  }
  const double p = a.p();
  const auto& t = a.times();
  const Control& omega = a.driver().control();
  double best = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      const double dx = (a.x_increment(i, j) - b.x_increment(i, j)).norm();
      const double dy = (a.y_increment(i, j) - b.y_increment(i, j)).norm();
      const double dc = (a.cross(i, j) - b.cross(i, j)).norm();
      if (dx == 0.0 && dy == 0.0 && dc == 0.0) continue;
      const double w = omega(t[i], t[j]);
      if (!(w > 0.0)) return std::numeric_limits<double>::infinity();
      const double w1 = std::pow(w, 1.0 / p), w2 = std::pow(w, 2.0 / p);
      best = std::max({best, dx / w1, dy / w1, dc / w2});
    }
  }
  return best;
}

SmoothMap affine_map(const Matrix& A, const Vector& c) {
  return {static_cast<int>(A.cols()), static_cast<int>(A.rows()),
          [A, c](const Vector& y) { return Vector(A * y + c); },
          [A](const Vector&) { return A; }};
}

// ---------------------------------------------------------------------------
// Sewing of index germs

namespace {

using IndexGerm = std::function<CrossElement(std::size_t, std::size_t)>;

std::vector<std::size_t> coarse_indices(std::size_t n, std::size_t stride) {
  if (stride == 0) throw std::invalid_argument("grid sewing: stride must be positive");
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < n; k += stride) idx.push_back(k);
  if (idx.back() != n - 1) idx.push_back(n - 1);
  return idx;
}

double element_gap(const CrossElement& a, const CrossElement& b) {
  const CrossAlgebra alg;
  return (alg.flatten(a) - alg.flatten(b)).cwiseAbs().maxCoeff();
}

// Slope of log defect against log ω over nested dyadic halvings of [lo, hi].
double defect_exponent(const IndexGerm& z, const RoughPath& driver, std::size_t lo, std::size_t hi) {
  const auto& t = driver.times();
  std::vector<double> lx, ly;
  std::size_t a = lo, b = hi;
  while (b - a >= 2) {
    const std::size_t mid = a + (b - a) / 2;
    const double defect = element_gap(z(a, b), z(a, mid) * z(mid, b));
    const double w = driver.control()(t[a], t[b]);
    if (defect > 0.0 && w > 0.0) {
      lx.push_back(std::log(w));
      ly.push_back(std::log(defect));
    }
    b = mid;
  }
  if (lx.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double n = static_cast<double>(lx.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    sx += lx[k];
    sy += ly[k];
    sxx += lx[k] * lx[k];
    sxy += lx[k] * ly[k];
  }
  const double den = n * sxx - sx * sx;
  return den != 0.0 ? (n * sxy - sx * sy) / den : std::numeric_limits<double>::quiet_NaN();
}

struct SewnGrid {
  std::vector<std::size_t> coarse;
  std::vector<CrossElement> cells;
  GridSewDiagnostics diagnostics;
};

SewnGrid sew_grid(const IndexGerm& z, const RoughPath& driver, int n_out, const GridSewOptions& opts) {
  SewnGrid out;
  out.coarse = coarse_indices(driver.size(), opts.stride);
  const int m = driver.dim();
  const CrossAlgebra alg;
  double worst_defect = -1.0;
  std::size_t worst_cell = 0;
  for (std::size_t c = 0; c + 1 < out.coarse.size(); ++c) {
    const std::size_t lo = out.coarse[c], hi = out.coarse[c + 1];
    if (hi - lo == 1) {
      out.cells.push_back(z(lo, hi));
      continue;
    }
    // Dyadic points of [lo, hi] are rounded to grid indices; once the level
    // resolves every grid cell further levels reproduce the grid product.
    const std::function<CrossElement(double, double)> germ = [&](double s, double t) {
      const auto a = static_cast<std::size_t>(std::llround(s));
      const auto b = static_cast<std::size_t>(std::llround(t));
      return a == b ? CrossElement::zero(n_out, m) : z(a, b);
    };
    const auto sewn = sew_with(alg, germ, static_cast<double>(lo), static_cast<double>(hi), opts.sew);
    out.diagnostics.max_level = std::max(out.diagnostics.max_level, sewn.diagnostics.level);
    out.cells.push_back(sewn.value);
    const std::size_t mid = lo + (hi - lo) / 2;
    const double defect = element_gap(z(lo, hi), z(lo, mid) * z(mid, hi));
    if (defect > worst_defect) {
      worst_defect = defect;
      worst_cell = c;
    }
  }
  out.diagnostics.defect_exponent =
      worst_defect > 0.0 ? defect_exponent(z, driver, out.coarse[worst_cell], out.coarse[worst_cell + 1])
                         : std::numeric_limits<double>::quiet_NaN();
  return out;
}

PartialRoughPath assemble(const RoughPath& driver, const SewnGrid& sewn, const Vector& start, double p) {
  std::vector<Vector> y;
  std::vector<Matrix> cross;
  y.reserve(sewn.coarse.size());
  y.push_back(start);
  for (const auto& cell : sewn.cells) {
    y.push_back(y.back() + cell.w);
    cross.push_back(cell.cross);
  }
  return {driver.at_indices(sewn.coarse), std::move(y), cross, p};
}

}  // namespace

PushforwardResult pushforward(const PartialRoughPath& prp, const SmoothMap& phi,
                              const GridSewOptions& opts) {
  if (phi.dim_in != prp.dim_y()) throw std::invalid_argument("pushforward: map dimension mismatch");
  std::vector<Vector> phi_y;
  std::vector<Matrix> jac;
  phi_y.reserve(prp.size());
  jac.reserve(prp.size());
  for (std::size_t k = 0; k < prp.size(); ++k) {
    phi_y.push_back(phi.value(prp.y(k)));
    jac.push_back(phi.jacobian(prp.y(k)));
  }
  const IndexGerm z = [&](std::size_t i, std::size_t j) -> CrossElement {
    return {phi_y[j] - phi_y[i], prp.x_increment(i, j), jac[i] * prp.cross(i, j)};
  };
  const auto sewn = sew_grid(z, prp.driver(), phi.dim_out, opts);
  // The sewn level-1 part telescopes; y is taken from the exact φ values.
  std::vector<Vector> exact;
  exact.reserve(sewn.coarse.size());
  for (std::size_t k : sewn.coarse) exact.push_back(phi_y[k]);
  std::vector<Matrix> cells;
  for (const auto& c : sewn.cells) cells.push_back(c.cross);
  return {PartialRoughPath(prp.driver().at_indices(sewn.coarse), std::move(exact), cells, prp.p()),
          sewn.diagnostics};
}

PushforwardResult rough_integral_along(const PartialRoughPath& prp, const VectorField& g,
                                       const GridSewOptions& opts) {
  if (g.dim_in() != prp.dim_y() || g.dim_driver() != prp.dim_x()) {
    throw std::invalid_argument("rough_integral_along: field dimensions do not match the path");
  }
  const int m = prp.dim_x();
  std::vector<Matrix> gy;
  std::vector<Gradient> dg;
  gy.reserve(prp.size());
  dg.reserve(prp.size());
  for (std::size_t k = 0; k < prp.size(); ++k) {
    gy.push_back(g.eval(prp.y(k)));
    dg.push_back(g.grad(prp.y(k)));
  }
  const IndexGerm z = [&](std::size_t i, std::size_t j) -> CrossElement {
    const GroupElement2 xij = prp.driver().increment(i, j);
    const Matrix c = prp.cross(i, j);
    Vector w = gy[i] * xij.level1();
    for (std::size_t k = 0; k < dg[i].size(); ++k) {
      for (int b = 0; b < m; ++b) w += c(static_cast<Eigen::Index>(k), b) * dg[i][k].col(b);
    }
    return {std::move(w), xij.level1(), gy[i] * xij.level2()};
  };
  const auto sewn = sew_grid(z, prp.driver(), g.dim_out(), opts);
  return {assemble(prp.driver(), sewn, Vector::Zero(g.dim_out()), prp.p()), sewn.diagnostics};
}

PartialRoughPath cross_against_decomposition(const PartialRoughPath& prp, const AreaDrift& beta,
                                             const VectorField& f, const SewOptions& opts) {
  if (beta.times != prp.times()) {
    throw std::invalid_argument("cross_against_decomposition: drift lives on a different grid");
  }
  const int d = prp.dim_y(), m = prp.dim_x();
  if (f.dim_in() != d || f.dim_out() != d || f.dim_driver() != m) {
    throw std::invalid_argument("cross_against_decomposition: field dimensions do not match the path");
  }
  // Integrand: vec_rowmajor(B) ↦ vec_rowmajor(f(y) B), a (d·m) x (m·m) matrix.
  std::vector<Matrix> integrand;
  std::vector<Vector> driver;
  integrand.reserve(prp.size());
  driver.reserve(prp.size());
  for (std::size_t k = 0; k < prp.size(); ++k) {
    const Matrix fy = f.eval(prp.y(k));
    Matrix lin = Matrix::Zero(d * m, m * m);
    for (int i = 0; i < d; ++i) {
      for (int a = 0; a < m; ++a) {
        for (int b = 0; b < m; ++b) lin(i * m + b, a * m + b) = fy(i, a);
      }
    }
    integrand.push_back(std::move(lin));
    driver.push_back(flatten_row_major(beta.beta[k]));
  }
  const double p = prp.p();
  const auto young = young_integral(prp.times(), integrand, driver, p, p / 2.0, opts);

  std::vector<Matrix> cells;
  cells.reserve(prp.size() - 1);
  for (std::size_t k = 0; k + 1 < prp.size(); ++k) {
    const Vector dj = young[k + 1] - young[k];
    Matrix c(d, m);
    for (int i = 0; i < d; ++i) {
      for (int b = 0; b < m; ++b) c(i, b) = dj(i * m + b);
    }
    cells.push_back(prp.cross(k, k + 1) - c);
  }
  AreaDrift negated = beta;
  for (auto& b : negated.beta) b = -b;
  return {recompose(prp.driver(), negated), prp.y_values(), cells, p};
}

}  // namespace rough
