#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "rough/tensor_algebra.hpp"

namespace rough {

/// Control ω(s, t) >= 0 on s <= t; superadditive with ω(t, t) = 0.
using Control = std::function<double(double, double)>;

/// ω(s, t) = t - s.
Control time_control();

/// Samples triples s <= u <= t from `times` and returns the largest violation
/// of ω(s,u) + ω(u,t) <= ω(s,t) (0 when superadditive on the sample).
double superadditivity_violation(const Control& control, const std::vector<double>& times);

/// Level-2 rough path stored as point values x_{t_k} = x_{t_0}^-1 ⊗ x_{t_k}.
///
/// Values live in flat column storage: column k of `level1` (m x N) and of
/// `level2` (m*m x N, row-major per column) hold the point value at times[k].
/// Increments are formed from point values, so Chen's relation holds by
/// construction.
class RoughPath {
 public:
  RoughPath() = default;
  RoughPath(std::vector<double> times, Matrix level1, Matrix level2,
            Control control = time_control());

  static RoughPath from_values(std::vector<double> times, const std::vector<GroupElement2>& values,
                               Control control = time_control());
  /// Composes per-interval increments by Chen's relation, starting at the identity.
  static RoughPath from_increments(std::vector<double> times,
                                   const std::vector<GroupElement2>& increments,
                                   Control control = time_control());

  int dim() const { return static_cast<int>(level1_.rows()); }
  std::size_t size() const { return times_.size(); }
  const std::vector<double>& times() const { return times_; }
  double start_time() const { return times_.front(); }
  double end_time() const { return times_.back(); }
  const Control& control() const { return control_; }

  GroupElement2 value(std::size_t k) const;
  GroupElement2 increment(std::size_t i, std::size_t j) const;
  Vector level1_increment(std::size_t i, std::size_t j) const;

  const Matrix& level1_data() const { return level1_; }
  const Matrix& level2_data() const { return level2_; }

  /// Value at an arbitrary time in [t_0, t_N]. Inside a grid cell the cell
  /// increment (1, δ, A) is interpolated as (1, τδ, τ²δ⊗δ/2 + τ(A - δ⊗δ/2)),
  /// which is exact for polylines and pure-area paths and keeps Chen's relation.
  GroupElement2 value_at(double t) const;

  /// Path evaluated on a new increasing grid inside [t_0, t_N] via value_at,
  /// re-anchored so the first value is the identity.
  RoughPath resampled(const std::vector<double>& new_times) const;

  /// Dilation δ_λ: level1 scaled by λ, level2 by λ².
  RoughPath dilated(double lambda) const;

  RoughPath with_control(Control control) const;

  /// Restriction to the grid points `indices` (increasing), re-anchored at the first.
  RoughPath at_indices(const std::vector<std::size_t>& indices) const;
  /// Restriction to an evenly strided sub-grid of at most `max_points` points
  /// that keeps both endpoints.
  RoughPath subgrid(std::size_t max_points) const;

 private:
  std::vector<double> times_;
  Matrix level1_;
  Matrix level2_;
  Control control_;
};

/// Evenly strided indices over [0, n) with both endpoints, at most `max_points` of them.
std::vector<std::size_t> strided_indices(std::size_t n, std::size_t max_points);

/// Symmetric level-2 drift β with β(t_0) = 0; increments are β(t) - β(s).
struct AreaDrift {
  std::vector<double> times;
  std::vector<Matrix> beta;

  Matrix increment(std::size_t i, std::size_t j) const { return beta[j] - beta[i]; }
  /// Piecewise-linear interpolation in time.
  Matrix value_at(double t) const;
  static AreaDrift zero(const std::vector<double>& times, int m);
};

/// Lift of the polyline through `points` at `times`; each straight segment
/// contributes (1, δ, δ⊗δ / 2).
RoughPath lift_piecewise_linear(const std::vector<Vector>& points, const std::vector<double>& times,
                                Control control = time_control());

/// Path (1, 0, A·(t - t_0)): no level-1 motion, only a linear area part.
RoughPath pure_area_path(const std::vector<double>& times, const Matrix& area_rate);

/// Options bounding the O(N³) / O(N²) scans used by the defect diagnostics.
struct ScanOptions {
  /// Triples / pairs are scanned on a strided sub-grid of at most this many
  /// points (always containing both endpoints).
  std::size_t max_points = 64;
};

/// Two-parameter map on grid indices, used to test Chen's relation on data
/// that is not stored as point values.
using GridMap = std::function<GroupElement2(std::size_t, std::size_t)>;

/// max over grid triples s < u < t of the largest entry of
/// x_{s,t} - x_{s,u} ⊗ x_{u,t}.
double chen_defect(const RoughPath& rp, ScanOptions opts = {});
double chen_defect(std::size_t n_points, const GridMap& increments, ScanOptions opts = {});

/// Grid approximation of the p-variation norm: the smallest C with
/// |x1_{s,t}| <= C ω^{1/p} and |x2_{s,t}|_F <= C² ω^{2/p} over all grid pairs.
/// Returns +inf when ω(s,t) = 0 for a non-trivial increment. O(N²).
double pvar_norm(const RoughPath& rp, double p);

/// max over grid pairs of |sym(x2_{s,t}) - x1_{s,t}⊗x1_{s,t} / 2|_F.
///
/// The quantity is additive (β(t) - β(s)), so pairs anchored at t_0 are
/// scanned on the full grid and all other pairs on a strided sub-grid of at
/// most `max_points` points. The result is exact for N <= max_points, is 0
/// iff the path is grid-geometric, and is never below half the exact value.
double geometricity_defect(const RoughPath& rp, std::size_t max_points = 2048);

struct Decomposition {
  RoughPath geometric;
  AreaDrift drift;
};

/// x = x̂ + β with β(t) - β(s) = sym(x2_{s,t}) - x1_{s,t}⊗x1_{s,t}/2 and
/// x̂ keeping level1 with level2 x2 - (β(t) - β(s)).
Decomposition decompose(const RoughPath& rp);
RoughPath recompose(const RoughPath& geometric, const AreaDrift& drift);

enum class Convention { Ito, Stratonovich };

/// Sampled Brownian motion on a uniform grid lifted with left-point (Itô,
/// per-step level2 = 0) or trapezoidal (Stratonovich, per-step δ⊗δ/2) sums.
RoughPath brownian_lift(std::uint64_t seed, int steps, double T, int m, Convention convention);

}  // namespace rough
