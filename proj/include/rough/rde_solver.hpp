#pragma once

// Rough differential equations dy = f(y) dx driven by a level-2 rough path.
//
// Each step [s, t] applies the almost rough path
//
//     y_t ≈ y_s + f(y_s) x1_{s,t} + (f·∇f)(y_s) x2_{s,t},
//     ∫_s^t (y_r - y_s) ⊗ dx_r ≈ f(y_s) x2_{s,t},
//
// and the cross-integral is carried across steps by the additivity identity,
// so the output is a partial rough path (x, y, ∫dy⊗dx) on the step grid.

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rough/partial_rough_path.hpp"
#include "rough/rough_path.hpp"
#include "rough/vector_field.hpp"

namespace rough {

struct SolverConfig {
  /// Step-rule constants: intervals satisfy ω^{1/p}(‖h‖ + μ‖∇h‖)‖x‖ <= Kμ.
  double K = 1.0;
  double mu = 1.0;
  /// Uniform step 2^-mesh_level; a negative value steps on the driver grid.
  int mesh_level = -1;
  double tol_sew = 1e-10;
  /// |y| above this is treated as explosion.
  double r_max = 1e6;
  std::size_t max_steps = std::size_t{1} << 24;
  double p = 2.0;
  /// Record the largest defect |z_{s,t} - z_{s,u} z_{u,t}| of the step germ
  /// (costs two extra half steps per step).
  bool track_step_defect = false;
  /// The driver norm reported in diagnostics is computed on a sub-grid of at
  /// most this many points.
  std::size_t norm_max_points = 1024;
  /// Optional map applied to the state after every step.
  std::function<void(Vector&)> project;
};

struct BlowupRecord {
  double threshold = 0.0;
  /// First time at which |y| exceeds the threshold (bisected inside the last step).
  double crossing_time = 0.0;
  /// |y| at the last accepted grid point.
  double last_value_norm = 0.0;
  std::string note;
};

struct SolverDiagnostics {
  double driver_pvar_norm = 0.0;
  std::size_t steps = 0;
  double max_step_defect = 0.0;
  std::string note;
};

struct RDESolution {
  PartialRoughPath path;
  std::optional<BlowupRecord> blowup;
  SolverDiagnostics diagnostics;

  const std::vector<double>& times() const { return path.times(); }
  const std::vector<Vector>& y() const { return path.y_values(); }
  /// max_t |y_t|.
  double sup_norm() const;
  /// max_t |y_t - y_0|.
  double sup_deviation() const;
};

/// Non-finite value returned by a field at a finite state.
class FieldEvaluationError : public std::runtime_error {
 public:
  FieldEvaluationError(double time, Vector state);
  double time() const { return time_; }
  const Vector& state() const { return state_; }

 private:
  double time_;
  Vector state_;
};

/// Solves on [t_0, t_0 + T] where t_0 is the driver's start time. Requires
/// 2 + γ > p. The second-order field defaults to f_dot_grad_f(f).
RDESolution solve_rde(const RoughPath& x, const VectorField& f, const Vector& a, double T,
                      const SolverConfig& cfg = {});
RDESolution solve_rde(const RoughPath& x, const VectorField& f, const SecondOrderField& f2,
                      const Vector& a, double T, const SolverConfig& cfg = {});

/// dz = h1(z) dx̂ + h2(z) dβ: the rough step against the geometric driver x̂
/// plus the Young increment h2(z)·(β(t) - β(s)), with β interpolated linearly
/// between its grid times. The returned path carries the cross-integral
/// against x̂.
RDESolution solve_rde_corrected(const RoughPath& x_hat, const AreaDrift& beta, const VectorField& h1,
                                const SecondOrderField& h2, const Vector& a, double T,
                                const SolverConfig& cfg = {});
RDESolution solve_rde_corrected(const RoughPath& x_hat, const AreaDrift& beta, const VectorField& h1,
                                const SecondOrderField& h1_second, const SecondOrderField& h2,
                                const Vector& a, double T, const SolverConfig& cfg = {});

/// Bisection for the first τ in (t0, t1] with |state(τ)| > threshold, where
/// `state(τ)` is the partial step from t0. `state(t1)` must exceed it.
BlowupRecord detect_blowup(const std::function<Vector(double)>& state, double t0, double t1,
                           double threshold, double last_value_norm);

struct Partition {
  std::vector<double> times;
  /// L = (Kμ / (‖h‖ + μ‖∇h‖))^p.
  double L = 0.0;
  double driver_norm = 0.0;
  /// ω(s_n, s_{n+1}) = L ‖x‖^{-p} for all but the last interval.
  double target = 0.0;
  std::size_t intervals() const { return times.size() - 1; }
};

/// L from declared bounds; throws when ‖h‖ or ‖∇h‖ is not declared.
double partition_constant(const FieldBounds& bounds, const SolverConfig& cfg);

/// Greedy partition of [t_0, t_0 + T] with ω(s_n, s_{n+1}) = L‖x‖^{-p}.
/// `driver_norm` defaults to pvar_norm(x, p).
Partition adaptive_partition(const RoughPath& x, const FieldBounds& bounds, double T,
                             const SolverConfig& cfg = {},
                             std::optional<double> driver_norm = std::nullopt);

/// C(1 + ‖x‖^p ω(t_0, t_0 + T)) with C = μ + μ/L: bound on sup |z_t - z_0| for
/// bounded fields.
double apriori_sup_bound(const FieldBounds& bounds, const RoughPath& x, double T,
                         const SolverConfig& cfg = {},
                         std::optional<double> driver_norm = std::nullopt);

struct GrowthRow {
  double lambda = 0.0;
  double driver_norm = 0.0;
  /// ‖x‖^p ω(0, T).
  double feature = 0.0;
  double sup_y = 0.0;
  double log_sup = 0.0;
  bool exploded = false;
};

struct GrowthReport {
  std::vector<GrowthRow> rows;
  double c1 = 0.0;
  double c2 = 0.0;
  /// min over rows of c1 + c2·feature - log(sup|y| + 1); >= 0 by construction of c1.
  double min_slack = 0.0;
  bool any_explosion = false;
  bool passed = false;
  std::string note;
};

/// Solves along δ_λ x for each λ (concurrently), fits log(sup|y| + 1) against
/// c1 + c2 ‖δ_λ x‖^p ω(0, T) by least squares, then raises c1 until the
/// envelope lies above every row. Passes iff no run explodes, all values are
/// finite and c2 >= 0. Rejects drivers that are not geometric.
GrowthReport growth_bound_check(const VectorField& f, const RoughPath& x, const Vector& a, double T,
                                const SolverConfig& cfg = {},
                                const std::vector<double>& lambdas = {1.0, 2.0, 4.0, 8.0});

}  // namespace rough
