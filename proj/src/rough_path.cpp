#include "rough/rough_path.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace rough {

namespace {

void require_increasing(const std::vector<double>& times) {
  if (times.empty()) throw std::invalid_argument("time grid is empty");
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (!(times[k] > times[k - 1])) {
      throw std::invalid_argument("time grid must be strictly increasing (index " +
                                  std::to_string(k) + ")");
    }
  }
}

Matrix unflatten(const double* data, int m) {
  Matrix out(m, m);
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) out(a, b) = data[a * m + b];
  }
  return out;
}

void store_value(Matrix& l1, Matrix& l2, Eigen::Index k, const GroupElement2& g) {
  const int m = g.dim();
  l1.col(k) = g.level1();
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) l2(a * m + b, k) = g.level2()(a, b);
  }
}

}  // namespace

std::vector<std::size_t> strided_indices(std::size_t n, std::size_t max_points) {
  std::vector<std::size_t> idx;
  if (n <= max_points || max_points < 2) {
    idx.resize(n);
    for (std::size_t k = 0; k < n; ++k) idx[k] = k;
    return idx;
  }
  idx.reserve(max_points);
  for (std::size_t k = 0; k < max_points; ++k) {
    const double pos = static_cast<double>(k) * static_cast<double>(n - 1) /
                       static_cast<double>(max_points - 1);
    const auto i = static_cast<std::size_t>(std::llround(pos));
    if (idx.empty() || idx.back() != i) idx.push_back(i);
  }
  return idx;
}

Control time_control() {
  return [](double s, double t) { return t - s; };
}

double superadditivity_violation(const Control& control, const std::vector<double>& times) {
  double worst = 0.0;
  for (double t : times) worst = std::max(worst, std::abs(control(t, t)));
  const auto idx = strided_indices(times.size(), 24);
  for (std::size_t a = 0; a < idx.size(); ++a) {
    for (std::size_t b = a; b < idx.size(); ++b) {
      for (std::size_t c = b; c < idx.size(); ++c) {
        const double s = times[idx[a]], u = times[idx[b]], t = times[idx[c]];
        worst = std::max(worst, control(s, u) + control(u, t) - control(s, t));
      }
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// RoughPath

RoughPath::RoughPath(std::vector<double> times, Matrix level1, Matrix level2, Control control)
    : times_(std::move(times)),
      level1_(std::move(level1)),
      level2_(std::move(level2)),
      control_(std::move(control)) {
  require_increasing(times_);
  const auto n = static_cast<Eigen::Index>(times_.size());
  const Eigen::Index m = level1_.rows();
  if (level1_.cols() != n || level2_.cols() != n || level2_.rows() != m * m) {
    throw std::invalid_argument("rough path storage does not match the time grid");
  }
  if (!level1_.allFinite() || !level2_.allFinite()) {
    throw std::invalid_argument("rough path values must be finite");
  }
  if (m > 0 && (level1_.col(0).cwiseAbs().maxCoeff() != 0.0 ||
                level2_.col(0).cwiseAbs().maxCoeff() != 0.0)) {
    throw std::invalid_argument("rough path value at the first time must be the identity");
  }
  if (!control_) control_ = time_control();
}

RoughPath RoughPath::from_values(std::vector<double> times, const std::vector<GroupElement2>& values,
                                 Control control) {
  if (values.size() != times.size() || values.empty()) {
    throw std::invalid_argument("from_values: need one value per time");
  }
  const int m = values.front().dim();
  const auto n = static_cast<Eigen::Index>(values.size());
  Matrix l1(m, n), l2(m * m, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    if (values[k].dim() != m) throw std::invalid_argument("from_values: dimension mismatch");
    store_value(l1, l2, k, values[k]);
  }
  return {std::move(times), std::move(l1), std::move(l2), std::move(control)};
}

RoughPath RoughPath::from_increments(std::vector<double> times,
                                     const std::vector<GroupElement2>& increments, Control control) {
  if (increments.size() + 1 != times.size()) {
    throw std::invalid_argument("from_increments: need one increment per grid interval");
  }
  const int m = increments.empty() ? 0 : increments.front().dim();
  const auto n = static_cast<Eigen::Index>(times.size());
  Matrix l1(m, n), l2(m * m, n);
  GroupElement2 running = GroupElement2::identity(m);
  store_value(l1, l2, 0, running);
  for (Eigen::Index k = 1; k < n; ++k) {
    running = mul(running, increments[k - 1]);
    store_value(l1, l2, k, running);
  }
  return {std::move(times), std::move(l1), std::move(l2), std::move(control)};
}

GroupElement2 RoughPath::value(std::size_t k) const {
  const auto col = static_cast<Eigen::Index>(k);
  return {level1_.col(col), unflatten(level2_.col(col).data(), dim())};
}

GroupElement2 RoughPath::increment(std::size_t i, std::size_t j) const {
  return rough::increment(value(i), value(j));
}

Vector RoughPath::level1_increment(std::size_t i, std::size_t j) const {
  return level1_.col(static_cast<Eigen::Index>(j)) - level1_.col(static_cast<Eigen::Index>(i));
}

GroupElement2 RoughPath::value_at(double t) const {
  const double t0 = times_.front(), tn = times_.back();
  const double slack = 1e-12 * std::max(1.0, std::abs(tn));
  if (t < t0 - slack || t > tn + slack) {
    throw std::out_of_range("value_at: time " + std::to_string(t) + " outside the path domain");
  }
  t = std::clamp(t, t0, tn);
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  if (it == times_.end()) return value(times_.size() - 1);
  const auto k = static_cast<std::size_t>(std::distance(times_.begin(), it)) - 1;
  const double tau = (t - times_[k]) / (times_[k + 1] - times_[k]);
  if (tau == 0.0) return value(k);
  const GroupElement2 cell = increment(k, k + 1);
  const Vector& d = cell.level1();
  const Matrix geo = 0.5 * d * d.transpose();
  const GroupElement2 partial(tau * d, tau * tau * geo + tau * (cell.level2() - geo));
  return mul(value(k), partial);
}

RoughPath RoughPath::resampled(const std::vector<double>& new_times) const {
  require_increasing(new_times);
  const GroupElement2 anchor_inv = inv(value_at(new_times.front()));
  std::vector<GroupElement2> values;
  values.reserve(new_times.size());
  for (double t : new_times) values.push_back(mul(anchor_inv, value_at(t)));
  values.front() = GroupElement2::identity(dim());
  return from_values(new_times, values, control_);
}

RoughPath RoughPath::dilated(double lambda) const {
  return {times_, lambda * level1_, lambda * lambda * level2_, control_};
}

RoughPath RoughPath::with_control(Control control) const {
  return {times_, level1_, level2_, std::move(control)};
}

RoughPath RoughPath::at_indices(const std::vector<std::size_t>& indices) const {
  if (indices.empty()) throw std::invalid_argument("at_indices: empty index list");
  std::vector<double> t;
  std::vector<GroupElement2> values;
  t.reserve(indices.size());
  values.reserve(indices.size());
  for (std::size_t k : indices) {
    if (k >= size()) throw std::out_of_range("at_indices: index beyond the grid");
    t.push_back(times_[k]);
    values.push_back(increment(indices.front(), k));
  }
  values.front() = GroupElement2::identity(dim());
  return from_values(std::move(t), values, control_);
}

RoughPath RoughPath::subgrid(std::size_t max_points) const {
  return at_indices(strided_indices(size(), max_points));
}

// ---------------------------------------------------------------------------
// AreaDrift

Matrix AreaDrift::value_at(double t) const {
  if (t <= times.front()) return beta.front();
  if (t >= times.back()) return beta.back();
  auto it = std::upper_bound(times.begin(), times.end(), t);
  const auto k = static_cast<std::size_t>(std::distance(times.begin(), it)) - 1;
  const double tau = (t - times[k]) / (times[k + 1] - times[k]);
  return (1.0 - tau) * beta[k] + tau * beta[k + 1];
}

AreaDrift AreaDrift::zero(const std::vector<double>& times, int m) {
  return {times, std::vector<Matrix>(times.size(), Matrix::Zero(m, m))};
}

// ---------------------------------------------------------------------------
// Constructions

RoughPath lift_piecewise_linear(const std::vector<Vector>& points, const std::vector<double>& times,
                                Control control) {
  if (points.size() != times.size()) {
    throw std::invalid_argument("lift_piecewise_linear: points and times differ in length");
  }
  require_increasing(times);
  std::vector<GroupElement2> segments;
  segments.reserve(points.size() - 1);
  for (std::size_t k = 1; k < points.size(); ++k) {
    if (points[k].size() != points[0].size()) {
      throw std::invalid_argument("lift_piecewise_linear: points differ in dimension");
    }
    segments.push_back(GroupElement2::segment(points[k] - points[k - 1]));
  }
  if (segments.empty()) {
    const int m = static_cast<int>(points.front().size());
    return {times, Matrix::Zero(m, 1), Matrix::Zero(m * m, 1), std::move(control)};
  }
  return RoughPath::from_increments(times, segments, std::move(control));
}

RoughPath pure_area_path(const std::vector<double>& times, const Matrix& area_rate) {
  require_increasing(times);
  const auto m = static_cast<int>(area_rate.rows());
  if (area_rate.cols() != m) throw std::invalid_argument("pure_area_path: area rate must be square");
  std::vector<GroupElement2> values;
  values.reserve(times.size());
  for (double t : times) values.emplace_back(Vector::Zero(m), (t - times.front()) * area_rate);
  return RoughPath::from_values(times, values);
}

RoughPath brownian_lift(std::uint64_t seed, int steps, double T, int m, Convention convention) {
  if (steps < 1) throw std::invalid_argument("brownian_lift: steps must be >= 1");
  if (m < 1 || !(T > 0.0)) throw std::invalid_argument("brownian_lift: need m >= 1 and T > 0");
  std::mt19937_64 rng(seed);
  const double h = T / steps;
  std::normal_distribution<double> normal(0.0, std::sqrt(h));
  std::vector<double> times(static_cast<std::size_t>(steps) + 1);
  std::vector<GroupElement2> incs;
  incs.reserve(static_cast<std::size_t>(steps));
  for (int k = 0; k <= steps; ++k) times[static_cast<std::size_t>(k)] = k * h;
  for (int k = 0; k < steps; ++k) {
    Vector d(m);
    for (int i = 0; i < m; ++i) d(i) = normal(rng);
    if (convention == Convention::Stratonovich) {
      incs.push_back(GroupElement2::segment(d));
    } else {
      incs.emplace_back(d, Matrix::Zero(m, m));
    }
  }
  return RoughPath::from_increments(std::move(times), incs);
}

// ---------------------------------------------------------------------------
// Diagnostics

double chen_defect(std::size_t n_points, const GridMap& increments, ScanOptions opts) {
  if (n_points < 3) throw std::invalid_argument("chen_defect: need at least 3 grid points");
  const auto idx = strided_indices(n_points, opts.max_points);
  double worst = 0.0;
  for (std::size_t a = 0; a < idx.size(); ++a) {
    for (std::size_t c = a + 2; c < idx.size(); ++c) {
      const GroupElement2 whole = increments(idx[a], idx[c]);
      for (std::size_t b = a + 1; b < c; ++b) {
        const GroupElement2 split = mul(increments(idx[a], idx[b]), increments(idx[b], idx[c]));
        worst = std::max(worst, max_abs_diff(whole, split));
      }
    }
  }
  return worst;
}

double chen_defect(const RoughPath& rp, ScanOptions opts) {
  return chen_defect(
      rp.size(), [&rp](std::size_t i, std::size_t j) { return rp.increment(i, j); }, opts);
}

double pvar_norm(const RoughPath& rp, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("pvar_norm: p must be >= 1");
  const int m = rp.dim();
  const std::size_t n = rp.size();
  const auto& times = rp.times();
  const Control& omega = rp.control();
  const double* l1 = rp.level1_data().data();
  const double* l2 = rp.level2_data().data();
  const double inv_p = 1.0 / p;
  std::vector<double> d(static_cast<std::size_t>(m));
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* a1 = l1 + i * m;
    const double* a2 = l2 + i * m * m;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double* b1 = l1 + j * m;
      const double* b2 = l2 + j * m * m;
      double n1 = 0.0;
      for (int r = 0; r < m; ++r) {
        d[r] = b1[r] - a1[r];
        n1 += d[r] * d[r];
      }
      double n2 = 0.0;
      for (int r = 0; r < m; ++r) {
        for (int c = 0; c < m; ++c) {
          const double e = b2[r * m + c] - a2[r * m + c] - a1[r] * d[c];
          n2 += e * e;
        }
      }
      const double hn = std::max(std::sqrt(n1), std::sqrt(std::sqrt(n2)));
      if (hn == 0.0) continue;
      const double w = omega(times[i], times[j]);
      if (!(w > 0.0)) return std::numeric_limits<double>::infinity();
      best = std::max(best, hn / std::pow(w, inv_p));
    }
  }
  return best;
}

namespace {

// β(t_k) = sym(x2_{0,k}) - x1_{0,k}⊗x1_{0,k}/2.
std::vector<Matrix> drift_values(const RoughPath& rp) {
  std::vector<Matrix> beta;
  beta.reserve(rp.size());
  for (std::size_t k = 0; k < rp.size(); ++k) {
    const GroupElement2 v = rp.value(k);
    beta.push_back(sym_part(v.level2()) - 0.5 * v.level1() * v.level1().transpose());
  }
  beta.front().setZero();
  return beta;
}

}  // namespace

double geometricity_defect(const RoughPath& rp, std::size_t max_points) {
  const auto beta = drift_values(rp);
  double worst = 0.0;
  for (const auto& b : beta) worst = std::max(worst, b.norm());
  const auto idx = strided_indices(beta.size(), max_points);
  for (std::size_t a = 1; a < idx.size(); ++a) {
    for (std::size_t b = a + 1; b < idx.size(); ++b) {
      worst = std::max(worst, (beta[idx[b]] - beta[idx[a]]).norm());
    }
  }
  return worst;
}

Decomposition decompose(const RoughPath& rp) {
  AreaDrift drift{rp.times(), drift_values(rp)};
  const int m = rp.dim();
  Matrix l2 = rp.level2_data();
  for (std::size_t k = 0; k < rp.size(); ++k) {
    for (int a = 0; a < m; ++a) {
      for (int b = 0; b < m; ++b) l2(a * m + b, static_cast<Eigen::Index>(k)) -= drift.beta[k](a, b);
    }
  }
  RoughPath geometric(rp.times(), rp.level1_data(), std::move(l2), rp.control());
  return {std::move(geometric), std::move(drift)};
}

RoughPath recompose(const RoughPath& geometric, const AreaDrift& drift) {
  if (drift.times != geometric.times() || drift.beta.size() != geometric.size()) {
    throw std::invalid_argument("recompose: drift and geometric part use different grids");
  }
  const int m = geometric.dim();
  Matrix l2 = geometric.level2_data();
  for (std::size_t k = 0; k < geometric.size(); ++k) {
    for (int a = 0; a < m; ++a) {
      for (int b = 0; b < m; ++b) l2(a * m + b, static_cast<Eigen::Index>(k)) += drift.beta[k](a, b);
    }
  }
  return {geometric.times(), geometric.level1_data(), std::move(l2), geometric.control()};
}

}  // namespace rough
