#pragma once

// Sewing map: the multiplicative functional attached to an almost rough path,
// obtained as the limit of ordered products over dyadic partitions.
//
// At level k the interval [s, t] is split into 2^k equal pieces and the
// ordered product z(t_0,t_1) ⊗ ... ⊗ z(t_{n-1},t_n) is formed. For an almost
// rough path with defect exponent θ the gaps between consecutive levels
// contract geometrically (ratio 2^{1-θ} asymptotically), so the iterates are
// accelerated with an Aitken step using the observed ratio. The returned value
// is the accelerated limit; the raw gaps are kept as diagnostics.

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "rough/rough_path.hpp"
#include "rough/tensor_algebra.hpp"

namespace rough {

struct SewOptions {
  double tol = 1e-10;
  int max_level = 22;
  /// When false, running out of levels returns the best estimate with
  /// `converged == false` instead of throwing.
  bool throw_on_failure = true;
};

struct SewDiagnostics {
  int level = 0;
  bool converged = false;
  /// Raw gaps |S_k - S_{k-1}| (max entry) between successive dyadic levels.
  std::vector<double> gaps;
  /// Last change of the accelerated estimate.
  double final_change = 0.0;
};

template <class Element>
struct SewResult {
  Element value;
  SewDiagnostics diagnostics;
};

class SewingError : public std::runtime_error {
 public:
  SewingError(const std::string& what, double last_gap, int level)
      : std::runtime_error(what), last_gap_(last_gap), level_(level) {}
  double last_gap() const { return last_gap_; }
  int level() const { return level_; }

 private:
  double last_gap_;
  int level_;
};

template <class Element>
struct AlmostRoughPathOf {
  std::function<Element(double, double)> map;
  /// Defect exponent θ > 1.
  double theta = 1.5;
  /// Estimate of C in |z_{s,t} - z_{s,u} ⊗ z_{u,t}| <= C ω(s,t)^θ.
  double defect_constant = 0.0;
  Control control = time_control();
};

using AlmostRoughPath = AlmostRoughPathOf<Tensor2>;

/// T2(R^m) with the truncated tensor product.
struct TensorAlgebra2 {
  using Element = Tensor2;
  Element multiply(const Element& a, const Element& b) const { return a * b; }
  Vector flatten(const Element& a) const;
  Element unflatten(const Vector& v, const Element& like) const;
};

/// Vectors (or flattened matrices) with addition as the product.
struct AbelianAlgebra {
  using Element = Vector;
  Element multiply(const Element& a, const Element& b) const { return a + b; }
  Vector flatten(const Element& a) const { return a; }
  Element unflatten(const Vector& v, const Element&) const { return v; }
};

namespace detail {

inline double max_abs(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

}  // namespace detail

/// Generic dyadic sewing of `z` over [s, t] in `algebra`.
template <class Algebra>
SewResult<typename Algebra::Element> sew_with(
    const Algebra& algebra,
    const std::function<typename Algebra::Element(double, double)>& z, double s, double t,
    const SewOptions& opts) {
  using Element = typename Algebra::Element;
  if (!(s <= t)) throw std::invalid_argument("sew: need s <= t");
  constexpr double kMaxRatio = 0.9;

  const Element level0 = z(s, t);
  SewResult<Element> out{level0, {}};
  if (s == t) {
    out.diagnostics.converged = true;
    return out;
  }

  Vector prev_raw = algebra.flatten(level0);
  Vector prev_est = prev_raw;
  Vector prev_gap;
  Element latest = level0;
  for (int k = 1; k <= opts.max_level; ++k) {
    const long pieces = 1L << k;
    const double h = (t - s) / static_cast<double>(pieces);
    Element prod = z(s, s + h);
    for (long i = 1; i < pieces; ++i) {
      const double a = s + static_cast<double>(i) * h;
      const double b = (i + 1 == pieces) ? t : s + static_cast<double>(i + 1) * h;
      prod = algebra.multiply(prod, z(a, b));
    }
    const Vector raw = algebra.flatten(prod);
    const Vector gap = raw - prev_raw;
    out.diagnostics.gaps.push_back(detail::max_abs(gap));

    Vector est = raw;
    if (prev_gap.size() > 0) {
      const double denom = prev_gap.squaredNorm();
      if (denom > 0.0) {
        const double r = gap.dot(prev_gap) / denom;
        if (r > 0.0 && r <= kMaxRatio) est = raw + gap * (r / (1.0 - r));
      }
    }
    const double change = detail::max_abs(est - prev_est);
    out.diagnostics.level = k;
    out.diagnostics.final_change = change;
    if (!std::isfinite(change)) {
      throw SewingError("sew: non-finite iterate at level " + std::to_string(k), change, k);
    }
    // Tolerances below the float64 resolution of the estimate are unreachable.
    const double floor = 8.0 * std::numeric_limits<double>::epsilon() * detail::max_abs(est);
    if (change <= std::max(opts.tol, floor)) {
      out.diagnostics.converged = true;
      if (k == 1) {
        // Already converged at the coarsest level.
        out.diagnostics.level = 0;
        out.value = level0;
      } else {
        out.value = algebra.unflatten(est, prod);
      }
      return out;
    }
    prev_raw = raw;
    prev_est = est;
    prev_gap = gap;
    latest = std::move(prod);
  }
  if (opts.throw_on_failure) {
    const double last = out.diagnostics.gaps.empty() ? 0.0 : out.diagnostics.gaps.back();
    throw SewingError("sew: no convergence within " + std::to_string(opts.max_level) +
                          " levels (last gap " + std::to_string(last) + ", last change " +
                          std::to_string(out.diagnostics.final_change) + ")",
                      last, opts.max_level);
  }
  out.value = algebra.unflatten(prev_est, latest);
  return out;
}

/// Sewing of a T2-valued almost rough path. Rejects θ <= 1.
SewResult<Tensor2> sew(const AlmostRoughPath& arp, double s, double t, const SewOptions& opts = {});

/// Sewing of an abelian almost rough path (the product is addition).
SewResult<Vector> sew_abelian(const AlmostRoughPathOf<Vector>& arp, double s, double t,
                              const SewOptions& opts = {});

/// |J(z)_{s,t} - z_{s,t}| / ω(s,t)^θ for a sewn value: the measured C'.
double measured_sewing_constant(const AlmostRoughPath& arp, double s, double t,
                                const Tensor2& sewn);

/// Largest |z_{s,t} - z_{s,u} ⊗ z_{u,t}| / ω(s,t)^θ over triples drawn from `times`.
double measured_defect_constant(const AlmostRoughPath& arp, const std::vector<double>& times);

/// Young integral ∫ Y dB of an integrand path Y (n x k matrices) against a
/// driver B (R^k) given on a common grid, returned as the cumulative path in
/// R^n (0 at the first time). Each grid cell is sewn from the abelian almost
/// rough path Y(s)(B(t) - B(s)) built on the linear interpolants of the grid
/// data. Requires 1/p_int + 1/q_drv > 1.
std::vector<Vector> young_integral(const std::vector<double>& times,
                                   const std::vector<Matrix>& integrand,
                                   const std::vector<Vector>& driver, double p_int, double q_drv,
                                   const SewOptions& opts = {});

}  // namespace rough
