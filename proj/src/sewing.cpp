#include "rough/sewing.hpp"

#include <algorithm>
#include <cmath>

namespace rough {

Vector TensorAlgebra2::flatten(const Element& a) const {
  const int m = a.dim();
  Vector v(1 + m + m * m);
  v(0) = a.scalar;
  v.segment(1, m) = a.level1;
  v.segment(1 + m, m * m) = flatten_row_major(a.level2);
  return v;
}

TensorAlgebra2::Element TensorAlgebra2::unflatten(const Vector& v, const Element& like) const {
  const int m = like.dim();
  Matrix l2(m, m);
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) l2(a, b) = v(1 + m + a * m + b);
  }
  return {v(0), v.segment(1, m), l2};
}

SewResult<Tensor2> sew(const AlmostRoughPath& arp, double s, double t, const SewOptions& opts) {
  if (!(arp.theta > 1.0)) throw std::invalid_argument("sew: defect exponent theta must exceed 1");
  return sew_with(TensorAlgebra2{}, arp.map, s, t, opts);
}

SewResult<Vector> sew_abelian(const AlmostRoughPathOf<Vector>& arp, double s, double t,
                              const SewOptions& opts) {
  if (!(arp.theta > 1.0)) throw std::invalid_argument("sew: defect exponent theta must exceed 1");
  return sew_with(AbelianAlgebra{}, arp.map, s, t, opts);
}

double measured_sewing_constant(const AlmostRoughPath& arp, double s, double t,
                                const Tensor2& sewn) {
  const double w = arp.control(s, t);
  if (!(w > 0.0)) return 0.0;
  return max_abs_diff(sewn, arp.map(s, t)) / std::pow(w, arp.theta);
}

double measured_defect_constant(const AlmostRoughPath& arp, const std::vector<double>& times) {
  double worst = 0.0;
  const std::size_t n = times.size();
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t c = a + 2; c < n; ++c) {
      const double w = arp.control(times[a], times[c]);
      if (!(w > 0.0)) continue;
      const Tensor2 whole = arp.map(times[a], times[c]);
      for (std::size_t b = a + 1; b < c; ++b) {
        const Tensor2 split = arp.map(times[a], times[b]) * arp.map(times[b], times[c]);
        worst = std::max(worst, max_abs_diff(whole, split) / std::pow(w, arp.theta));
      }
    }
  }
  return worst;
}

std::vector<Vector> young_integral(const std::vector<double>& times,
                                   const std::vector<Matrix>& integrand,
                                   const std::vector<Vector>& driver, double p_int, double q_drv,
                                   const SewOptions& opts) {
  if (!(p_int >= 1.0 && q_drv >= 1.0) || !(1.0 / p_int + 1.0 / q_drv > 1.0)) {
    throw std::invalid_argument("young_integral: need 1/p_int + 1/q_drv > 1");
  }
  const std::size_t n = times.size();
  if (integrand.size() != n || driver.size() != n || n == 0) {
    throw std::invalid_argument("young_integral: integrand, driver and times differ in length");
  }
  const auto rows = integrand.front().rows();
  const auto k = driver.front().size();
  if (integrand.front().cols() != k) {
    throw std::invalid_argument("young_integral: integrand columns must match driver dimension");
  }

  // The tolerance is spread over the cells in proportion to their width.
  const double span = times.back() - times.front();
  std::vector<Vector> out;
  out.reserve(n);
  out.push_back(Vector::Zero(rows));
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double t0 = times[i], t1 = times[i + 1];
    const Matrix& y0 = integrand[i];
    const Matrix dy = integrand[i + 1] - y0;
    const Vector& b0 = driver[i];
    const Vector db = driver[i + 1] - b0;
    const double width = t1 - t0;
    AlmostRoughPathOf<Vector> cell;
    cell.theta = 2.0;
    cell.map = [&](double s, double t) -> Vector {
      const double us = (s - t0) / width, ut = (t - t0) / width;
      return (y0 + us * dy) * ((ut - us) * db);
    };
    SewOptions cell_opts = opts;
    cell_opts.tol = opts.tol * width / span;
    const auto sewn = sew_abelian(cell, t0, t1, cell_opts);
    out.push_back(out.back() + sewn.value);
  }
  return out;
}

}  // namespace rough
