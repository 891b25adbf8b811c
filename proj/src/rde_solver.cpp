#include "rough/rde_solver.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <sstream>

namespace rough {

double RDESolution::sup_norm() const {
  double s = 0.0;
  for (const auto& v : y()) s = std::max(s, v.norm());
  return s;
}

double RDESolution::sup_deviation() const {
  double s = 0.0;
  for (const auto& v : y()) s = std::max(s, (v - y().front()).norm());
  return s;
}

namespace {

std::string describe(const Vector& v) {
  std::ostringstream os;
  os << '(';
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v(i);
  os << ')';
  return os.str();
}

}  // namespace

FieldEvaluationError::FieldEvaluationError(double time, Vector state)
    : std::runtime_error("field returned a non-finite value at t = " + std::to_string(time) +
                         ", y = " + describe(state)),
      time_(time),
      state_(std::move(state)) {}

namespace {

// One germ evaluation: (y increment, driver increment, cross increment).
using StepFn = std::function<CrossElement(const Vector& y, const GroupElement2& inc,
                                          const Matrix& dbeta, double t)>;

std::vector<double> step_times(const RoughPath& x, double T, const SolverConfig& cfg) {
  if (!(T > 0.0)) throw std::invalid_argument("solver: horizon T must be positive");
  const double t0 = x.start_time();
  const double t_end = t0 + T;
  if (t_end > x.end_time() + 1e-12 * std::max(1.0, std::abs(x.end_time()))) {
    throw std::invalid_argument("solver: horizon extends beyond the driver");
  }
  std::vector<double> out;
  if (cfg.mesh_level >= 0) {
    const double h = std::ldexp(1.0, -cfg.mesh_level);
    const auto n = static_cast<std::size_t>(std::ceil(T / h - 1e-9));
    if (n > cfg.max_steps) throw std::invalid_argument("solver: mesh exceeds max_steps");
    out.reserve(n + 1);
    for (std::size_t k = 0; k < n; ++k) out.push_back(t0 + static_cast<double>(k) * h);
    out.push_back(t_end);
  } else {
    for (double t : x.times()) {
      if (t < t_end) out.push_back(t);
    }
    out.push_back(t_end);
    if (out.size() - 1 > cfg.max_steps) throw std::invalid_argument("solver: grid exceeds max_steps");
  }
  return out;
}

void check_config(const SolverConfig& cfg) {
  if (!(cfg.r_max > 0.0)) throw std::invalid_argument("solver: r_max must be positive");
  if (!(cfg.p >= 2.0 && cfg.p < 3.0)) throw std::invalid_argument("solver: p must lie in [2, 3)");
}

double driver_norm_on_subgrid(const RoughPath& x, const SolverConfig& cfg) {
  return pvar_norm(x.size() > cfg.norm_max_points ? x.subgrid(cfg.norm_max_points) : x, cfg.p);
}

double gap(const CrossElement& a, const CrossElement& b) {
  const CrossAlgebra alg;
  return (alg.flatten(a) - alg.flatten(b)).cwiseAbs().maxCoeff();
}

RDESolution integrate(const RoughPath& x, const AreaDrift* beta, const StepFn& step, const Vector& a,
                      double T, const SolverConfig& cfg) {
  check_config(cfg);
  if (!a.allFinite()) throw std::invalid_argument("solver: initial value must be finite");
  const auto times = step_times(x, T, cfg);
  const int m = x.dim();

  std::vector<GroupElement2> xv;
  xv.reserve(times.size());
  for (double t : times) xv.push_back(x.value_at(t));
  std::vector<Matrix> bv;
  if (beta) {
    bv.reserve(times.size());
    for (double t : times) bv.push_back(beta->value_at(t));
  }
  const Matrix no_drift = Matrix::Zero(m, m);
  const auto drift = [&](std::size_t i, std::size_t j) -> Matrix {
    return beta ? Matrix(bv[j] - bv[i]) : no_drift;
  };

  std::vector<Vector> ys;
  std::vector<Matrix> cells;
  ys.reserve(times.size());
  cells.reserve(times.size());
  ys.push_back(a);
  if (cfg.project) cfg.project(ys.back());

  RDESolution sol;
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    const Vector& y = ys.back();
    const CrossElement z = step(y, increment(xv[i], xv[i + 1]), drift(i, i + 1), times[i]);

    if (cfg.track_step_defect) {
      const double mid = 0.5 * (times[i] + times[i + 1]);
      const GroupElement2 xm = x.value_at(mid);
      const Matrix bm = beta ? beta->value_at(mid) : no_drift;
      const Matrix d1 = beta ? Matrix(bm - bv[i]) : no_drift;
      const Matrix d2 = beta ? Matrix(bv[i + 1] - bm) : no_drift;
      const CrossElement z1 = step(y, increment(xv[i], xm), d1, times[i]);
      const CrossElement z2 = step(y + z1.w, increment(xm, xv[i + 1]), d2, mid);
      sol.diagnostics.max_step_defect = std::max(sol.diagnostics.max_step_defect, gap(z, z1 * z2));
    }

    Vector next = y + z.w;
    if (cfg.project) cfg.project(next);
    if (!next.allFinite() || next.norm() > cfg.r_max) {
      const Vector y_start = y;
      const double t_start = times[i];
      const auto partial = [&](double tau) -> Vector {
        const GroupElement2 inc = increment(xv[i], x.value_at(tau));
        const Matrix db = beta ? Matrix(beta->value_at(tau) - bv[i]) : no_drift;
        Vector out = y_start + step(y_start, inc, db, t_start).w;
        if (cfg.project) cfg.project(out);
        return out;
      };
      sol.blowup = detect_blowup(partial, t_start, times[i + 1], cfg.r_max, y_start.norm());
      break;
    }
    ys.push_back(std::move(next));
    cells.push_back(z.cross);
  }

  const std::size_t n = ys.size();
  std::vector<double> kept(times.begin(), times.begin() + static_cast<std::ptrdiff_t>(n));
  std::vector<GroupElement2> values(xv.begin(), xv.begin() + static_cast<std::ptrdiff_t>(n));
  for (auto& v : values) v = increment(xv.front(), v);
  values.front() = GroupElement2::identity(m);
  if (n == 1) {
    // Exploded within the first step: keep a degenerate one-point path.
    kept.push_back(times[1]);
    values.push_back(GroupElement2::identity(m));
    ys.push_back(ys.front());
    cells.push_back(Matrix::Zero(a.size(), m));
  }
  sol.path = PartialRoughPath(RoughPath::from_values(std::move(kept), values, x.control()),
                              std::move(ys), cells, cfg.p);
  sol.diagnostics.steps = n - 1;
  sol.diagnostics.driver_pvar_norm = driver_norm_on_subgrid(x, cfg);
  if (x.size() > cfg.norm_max_points) {
    sol.diagnostics.note = "driver norm computed on a " + std::to_string(cfg.norm_max_points) +
                           "-point sub-grid";
  }
  return sol;
}

void check_field(const VectorField& f, const Vector& a, int m, double p) {
  if (f.dim_in() != f.dim_out()) throw std::invalid_argument("solver: field must map R^d to L(R^m, R^d)");
  if (f.dim_in() != a.size()) throw std::invalid_argument("solver: initial value has the wrong dimension");
  if (f.dim_driver() != m) throw std::invalid_argument("solver: field and driver dimensions differ");
  if (!(2.0 + f.gamma() > p)) throw std::invalid_argument("solver: need 2 + gamma > p");
}

void require_finite(const Matrix& v, double t, const Vector& y) {
  if (!v.allFinite()) throw FieldEvaluationError(t, y);
}

}  // namespace

RDESolution solve_rde(const RoughPath& x, const VectorField& f, const Vector& a, double T,
                      const SolverConfig& cfg) {
  return solve_rde(x, f, f_dot_grad_f(f), a, T, cfg);
}

RDESolution solve_rde(const RoughPath& x, const VectorField& f, const SecondOrderField& f2,
                      const Vector& a, double T, const SolverConfig& cfg) {
  check_field(f, a, x.dim(), cfg.p);
  const StepFn step = [&](const Vector& y, const GroupElement2& inc, const Matrix&, double t) {
    const Matrix F = f.eval(y);
    require_finite(F, t, y);
    const Matrix M = f2.eval(y);
    require_finite(M, t, y);
    return CrossElement{F * inc.level1() + M * flatten_row_major(inc.level2()), inc.level1(),
                        F * inc.level2()};
  };
  return integrate(x, nullptr, step, a, T, cfg);
}

RDESolution solve_rde_corrected(const RoughPath& x_hat, const AreaDrift& beta, const VectorField& h1,
                                const SecondOrderField& h2, const Vector& a, double T,
                                const SolverConfig& cfg) {
  return solve_rde_corrected(x_hat, beta, h1, f_dot_grad_f(h1), h2, a, T, cfg);
}

RDESolution solve_rde_corrected(const RoughPath& x_hat, const AreaDrift& beta, const VectorField& h1,
                                const SecondOrderField& h1_second, const SecondOrderField& h2,
                                const Vector& a, double T, const SolverConfig& cfg) {
  check_field(h1, a, x_hat.dim(), cfg.p);
  if (h2.dim_out() != a.size() || h2.dim_driver() != x_hat.dim()) {
    throw std::invalid_argument("solve_rde_corrected: h2 dimensions do not match");
  }
  if (beta.beta.empty() || beta.beta.front().rows() != x_hat.dim()) {
    throw std::invalid_argument("solve_rde_corrected: drift dimension does not match the driver");
  }
  const StepFn step = [&](const Vector& y, const GroupElement2& inc, const Matrix& dbeta, double t) {
    const Matrix F = h1.eval(y);
    require_finite(F, t, y);
    const Matrix M = h1_second.eval(y);
    require_finite(M, t, y);
    const Matrix H = h2.eval(y);
    require_finite(H, t, y);
    return CrossElement{F * inc.level1() + M * flatten_row_major(inc.level2()) +
                            H * flatten_row_major(dbeta),
                        inc.level1(), F * inc.level2()};
  };
  return integrate(x_hat, &beta, step, a, T, cfg);
}

BlowupRecord detect_blowup(const std::function<Vector(double)>& state, double t0, double t1,
                           double threshold, double last_value_norm) {
  const auto above = [&](double tau) {
    const Vector v = state(tau);
    return !v.allFinite() || v.norm() > threshold;
  };
  double lo = t0, hi = t1;
  for (int it = 0; it < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * std::abs(hi);
       ++it) {
    const double mid = 0.5 * (lo + hi);
    (above(mid) ? hi : lo) = mid;
  }
  BlowupRecord rec;
  rec.threshold = threshold;
  rec.crossing_time = hi;
  rec.last_value_norm = last_value_norm;
  rec.note = "crossing of |y| = threshold; the blow-up time itself is a limit and lies at or after it "
             "when |y| grows monotonically";
  return rec;
}

// ---------------------------------------------------------------------------
// Bounds

double partition_constant(const FieldBounds& bounds, const SolverConfig& cfg) {
  if (!bounds.sup || !bounds.sup_grad) {
    throw std::invalid_argument("partition rule needs declared bounds on |h| and |grad h|");
  }
  const double denom = *bounds.sup + cfg.mu * *bounds.sup_grad;
  if (!(denom > 0.0)) return std::numeric_limits<double>::infinity();
  return std::pow(cfg.K * cfg.mu / denom, cfg.p);
}

Partition adaptive_partition(const RoughPath& x, const FieldBounds& bounds, double T,
                             const SolverConfig& cfg, std::optional<double> driver_norm) {
  Partition out;
  out.L = partition_constant(bounds, cfg);
  out.driver_norm = driver_norm ? *driver_norm : pvar_norm(x, cfg.p);
  const double t0 = x.start_time(), t_end = t0 + T;
  const Control& omega = x.control();
  out.times.push_back(t0);
  if (out.driver_norm == 0.0 || std::isinf(out.L)) {
    out.target = std::numeric_limits<double>::infinity();
    out.times.push_back(t_end);
    return out;
  }
  out.target = out.L * std::pow(out.driver_norm, -cfg.p);
  while (out.times.back() < t_end) {
    const double s = out.times.back();
    if (omega(s, t_end) <= out.target) {
      out.times.push_back(t_end);
      break;
    }
    double lo = s, hi = t_end;
    for (int it = 0; it < 200 && hi - lo > 2.0 * std::numeric_limits<double>::epsilon() * std::abs(hi);
         ++it) {
      const double mid = 0.5 * (lo + hi);
      (omega(s, mid) < out.target ? lo : hi) = mid;
    }
    if (!(hi > s)) throw std::runtime_error("adaptive_partition: no progress (control too steep)");
    out.times.push_back(hi);
    if (out.times.size() > cfg.max_steps) throw std::runtime_error("adaptive_partition: too many intervals");
  }
  return out;
}

double apriori_sup_bound(const FieldBounds& bounds, const RoughPath& x, double T,
                         const SolverConfig& cfg, std::optional<double> driver_norm) {
  const double L = partition_constant(bounds, cfg);
  const double norm = driver_norm ? *driver_norm : pvar_norm(x, cfg.p);
  const double w = x.control()(x.start_time(), x.start_time() + T);
  const double C = cfg.mu + (std::isinf(L) ? 0.0 : cfg.mu / L);
  return C * (1.0 + std::pow(norm, cfg.p) * w);
}

GrowthReport growth_bound_check(const VectorField& f, const RoughPath& x, const Vector& a, double T,
                                const SolverConfig& cfg, const std::vector<double>& lambdas) {
  if (lambdas.empty()) throw std::invalid_argument("growth_bound_check: no scales given");
  const double scale = std::max(1.0, x.level2_data().cwiseAbs().maxCoeff());
  if (geometricity_defect(x) > 1e-9 * scale) {
    throw std::invalid_argument("growth_bound_check: driver is not geometric");
  }
  const double w = x.control()(x.start_time(), x.start_time() + T);
  std::vector<std::future<GrowthRow>> jobs;
  jobs.reserve(lambdas.size());
  for (double lambda : lambdas) {
    jobs.push_back(std::async(std::launch::async, [&, lambda] {
      const RoughPath xl = x.dilated(lambda);
      GrowthRow row;
      row.lambda = lambda;
      row.driver_norm = driver_norm_on_subgrid(xl, cfg);
      row.feature = std::pow(row.driver_norm, cfg.p) * w;
      const RDESolution sol = solve_rde(xl, f, a, T, cfg);
      row.exploded = sol.blowup.has_value();
      row.sup_y = row.exploded ? std::numeric_limits<double>::infinity() : sol.sup_norm();
      row.log_sup = std::log(row.sup_y + 1.0);
      return row;
    }));
  }
  GrowthReport rep;
  for (auto& j : jobs) rep.rows.push_back(j.get());

  bool finite = true;
  for (const auto& r : rep.rows) {
    rep.any_explosion = rep.any_explosion || r.exploded;
    finite = finite && std::isfinite(r.log_sup) && std::isfinite(r.feature);
  }
  if (!rep.any_explosion && finite) {
    const double n = static_cast<double>(rep.rows.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& r : rep.rows) {
      sx += r.feature;
      sy += r.log_sup;
      sxx += r.feature * r.feature;
      sxy += r.feature * r.log_sup;
    }
    const double den = n * sxx - sx * sx;
    rep.c2 = den > 0.0 ? (n * sxy - sx * sy) / den : 0.0;
    rep.c1 = (sy - rep.c2 * sx) / n;
    double lift = 0.0;
    for (const auto& r : rep.rows) lift = std::max(lift, r.log_sup - rep.c1 - rep.c2 * r.feature);
    // The nudge keeps rounding in the slack below from turning a tight row negative.
    rep.c1 += lift + 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(rep.c1));
    rep.min_slack = std::numeric_limits<double>::infinity();
    for (const auto& r : rep.rows) {
      rep.min_slack = std::min(rep.min_slack, rep.c1 + rep.c2 * r.feature - r.log_sup);
    }
    rep.passed = rep.c2 >= 0.0 && rep.min_slack >= 0.0;
  }
  if (rep.any_explosion) {
    rep.note = "explosion detected for a geometric driver and a linear-growth field";
  } else if (!finite) {
    rep.note = "non-finite values in the sweep";
  } else if (rep.c2 < 0.0) {
    rep.note = "fitted envelope slope is negative";
  }
  return rep;
}

}  // namespace rough
