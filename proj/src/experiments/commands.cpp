#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

#include "rough/experiments.hpp"
#include "rough/io.hpp"
#include "rough/log_sphere.hpp"

namespace rough::experiments {

namespace fs = std::filesystem;

bool CommandResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

namespace {

Check at_most(const std::string& name, double value, double threshold) {
  return {name, value, threshold, std::isfinite(value) && value <= threshold};
}

Check at_least(const std::string& name, double value, double threshold) {
  return {name, value, threshold, std::isfinite(value) && value >= threshold};
}

std::string output_path(const ExperimentConfig& cfg, const std::string& file) {
  fs::create_directories(cfg.out_dir);
  return (fs::path(cfg.out_dir) / file).string();
}

std::string tag(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

std::size_t csv_stride(const ExperimentConfig& cfg, std::size_t rows) {
  const auto max_rows = cfg.param("csv_max_rows").get<std::size_t>();
  return std::max<std::size_t>(1, rows / std::max<std::size_t>(1, max_rows));
}

Vector initial_value(const ExperimentConfig& cfg, int d) {
  if (static_cast<int>(cfg.a.size()) != d) {
    throw std::invalid_argument("config: initial value 'a' must have " + std::to_string(d) + " entries");
  }
  return Eigen::Map<const Vector>(cfg.a.data(), d);
}

void write_report(const ExperimentConfig& cfg, CommandResult& result) {
  json checks = json::array();
  for (const auto& c : result.checks) {
    checks.push_back({{"name", c.name}, {"value", c.value}, {"threshold", c.threshold}, {"passed", c.passed}});
  }
  result.report["command"] = cfg.command;
  result.report["checks"] = checks;
  result.report["passed"] = result.passed();
  std::ofstream os(output_path(cfg, cfg.command + "_report.json"));
  os << std::setprecision(17) << result.report.dump(2) << '\n';
}

}  // namespace

// ---------------------------------------------------------------------------

CommandResult cmd_explosion_demo(const ExperimentConfig& cfg) {
  CommandResult res;
  const auto a1_values = cfg.param("a1_values").get<std::vector<double>>();
  const double fraction = cfg.param("fit_fraction").get<double>();
  const double rel_tol = cfg.param("rel_tol").get<double>();
  const double window = cfg.param("window").get<double>();
  const VectorField f = counterexample_field();
  const SecondOrderField f2 = counterexample_second_order();
  res.report["runs"] = json::array();

  for (double a1 : a1_values) {
    if (!(a1 > 0.0)) throw std::invalid_argument("explosion-demo: a1 values must be positive");
    const double t_star = 1.0 / a1;
    const double T = 1.5 * t_star;
    const Decomposition dec = decompose(pure_area_path({0.0, T}, Matrix::Identity(1, 1)));
    Vector a(2);
    a << a1, 0.0;
    const RDESolution sol = solve_rde_corrected(dec.geometric, dec.drift, f, f2, f2, a, T, cfg.solver);

    double max_y2 = 0.0, max_rel = 0.0;
    const auto& ts = sol.times();
    for (std::size_t k = 0; k < ts.size(); ++k) {
      max_y2 = std::max(max_y2, std::abs(sol.y()[k](1)));
      if (ts[k] <= fraction * t_star) {
        const double exact = a1 / (1.0 - a1 * ts[k]);
        max_rel = std::max(max_rel, std::abs(sol.y()[k](0) - exact) / exact);
      }
    }
    const std::string label = "a1=" + tag(a1);
    res.checks.push_back(at_most(label + " max |y2|", max_y2, 1e-10));
    res.checks.push_back(at_most(label + " rel. error vs a1/(1-a1 t), t <= " + tag(fraction) + "/a1", max_rel,
                                 rel_tol));
    const double crossing = sol.blowup ? sol.blowup->crossing_time : std::numeric_limits<double>::infinity();
    res.checks.push_back(at_most(label + " |crossing - 1/a1|", std::abs(crossing - t_star), window));

    const std::string stem = "explosion_a1_" + tag(a1);
    {
      std::ofstream os(output_path(cfg, stem + ".csv"));
      os << std::setprecision(17) << "t,y1,y2,exact\n";
      const std::size_t stride = csv_stride(cfg, ts.size());
      for (std::size_t k = 0; k < ts.size(); ++k) {
        if (k % stride != 0 && k + 1 != ts.size()) continue;
        os << ts[k] << ',' << sol.y()[k](0) << ',' << sol.y()[k](1) << ',' << a1 / (1.0 - a1 * ts[k]) << '\n';
      }
    }
    if (sol.blowup) write_blowup_json(output_path(cfg, stem + "_blowup.json"), *sol.blowup);

    Series num{"numerical y1", {}, {}}, exact{"a1/(1-a1 t)", {}, {}};
    const std::size_t stride = std::max<std::size_t>(1, ts.size() / 2000);
    for (std::size_t k = 0; k < ts.size(); k += stride) {
      num.x.push_back(ts[k]);
      num.y.push_back(sol.y()[k](0));
      exact.x.push_back(ts[k]);
      exact.y.push_back(a1 / (1.0 - a1 * ts[k]));
    }
    write_svg_plot(output_path(cfg, stem + ".svg"),
                   {"Pure-area driver, a1 = " + tag(a1), "t", "y1", true}, {num, exact});

    res.report["runs"].push_back({{"a1", a1},
                                  {"steps", sol.diagnostics.steps},
                                  {"crossing_time", crossing},
                                  {"threshold", cfg.solver.r_max},
                                  {"max_abs_y2", max_y2},
                                  {"max_rel_error", max_rel}});
  }
  write_report(cfg, res);
  return res;
}

CommandResult cmd_growth_demo(const ExperimentConfig& cfg) {
  CommandResult res;
  const VectorField f = make_field(cfg.field);
  const RoughPath x = make_driver(cfg.driver, cfg.T, cfg.seed);
  const Vector a = initial_value(cfg, f.dim_state());
  const auto lambdas = cfg.param("lambdas").get<std::vector<double>>();

  const GrowthReport rep = growth_bound_check(f, x, a, cfg.T, cfg.solver, lambdas);
  const RDESolution still = solve_rde(x.dilated(0.0), f, a, cfg.T, cfg.solver);

  res.checks.push_back({"explosions among geometric runs", rep.any_explosion ? 1.0 : 0.0, 0.0, !rep.any_explosion});
  res.checks.push_back(at_least("envelope slope c2", rep.c2, 0.0));
  res.checks.push_back(at_least("envelope slack (min over rows)", rep.min_slack, 0.0));
  res.checks.push_back(at_most("zero driver: |sup|y| - |a||", std::abs(still.sup_norm() - a.norm()), 1e-12));

  {
    std::ofstream os(output_path(cfg, "growth.csv"));
    os << std::setprecision(17) << "lambda,driver_norm,feature,sup_y,log_sup_plus_1,envelope\n";
    for (const auto& r : rep.rows) {
      os << r.lambda << ',' << r.driver_norm << ',' << r.feature << ',' << r.sup_y << ',' << r.log_sup << ','
         << rep.c1 + rep.c2 * r.feature << '\n';
    }
  }
  Series pts{"log(sup|y|+1)", {}, {}, true}, env{"envelope c1 + c2 F", {}, {}};
  for (const auto& r : rep.rows) {
    pts.x.push_back(r.feature);
    pts.y.push_back(r.log_sup);
  }
  if (!rep.rows.empty()) {
    const double fmax = rep.rows.back().feature;
    for (int k = 0; k <= 50; ++k) {
      env.x.push_back(fmax * k / 50.0);
      env.y.push_back(rep.c1 + rep.c2 * fmax * k / 50.0);
    }
  }
  write_svg_plot(output_path(cfg, "growth.svg"), {"Growth under dilated geometric drivers", "|x|^p w(0,T)",
                                                  "log(sup|y| + 1)", false},
                 {pts, env});

  json rows = json::array();
  for (const auto& r : rep.rows) {
    rows.push_back({{"lambda", r.lambda}, {"driver_norm", r.driver_norm}, {"feature", r.feature},
                    {"sup_y", r.sup_y}, {"exploded", r.exploded}});
  }
  res.report = {{"rows", rows}, {"c1", rep.c1}, {"c2", rep.c2}, {"note", rep.note}};
  write_report(cfg, res);
  return res;
}

CommandResult cmd_changevar_check(const ExperimentConfig& cfg) {
  CommandResult res;
  const VectorField f = make_field(cfg.field);
  const RoughPath x = make_driver(cfg.driver, cfg.T, cfg.seed);
  const Vector a = initial_value(cfg, f.dim_state());
  const double tol = cfg.param("tolerance").get<double>();
  const double geo = geometricity_defect(x);
  res.checks.push_back(at_most("driver geometricity defect", geo, 1e-9));

  const RDESolution ys = solve_rde(x, f, a, cfg.T, cfg.solver);
  if (ys.blowup) throw std::runtime_error("changevar-check: the original equation exploded");

  const json shift_spec = cfg.param("shift");
  const bool automatic = shift_spec.is_string() && shift_spec.get<std::string>() == "auto";
  ShiftedMap shift;
  double radius = 0.0;
  if (automatic) {
    // The a-posteriori radius of the computed trajectory replaces the a-priori one.
    for (const auto& y : ys.y()) radius = std::max(radius, y.norm());
    shift = choose_shift(a, radius);
  } else {
    const auto b = shift_spec.get<std::vector<double>>();
    shift.b = Eigen::Map<const Vector>(b.data(), static_cast<Eigen::Index>(b.size()));
  }

  const VectorField h = transformed_field(f, shift);
  SolverConfig scfg = cfg.solver;
  scfg.project = renormalize_theta;
  const RDESolution zs = solve_rde(x, h, shift.psi(a), cfg.T, scfg);
  if (zs.blowup) throw std::runtime_error("changevar-check: the transformed equation exploded");

  double diff = 0.0, min_radius = std::numeric_limits<double>::infinity();
  Series s1{"psi(y) rho", {}, {}}, s2{"z rho", {}, {}};
  const int d = f.dim_state();
  for (std::size_t k = 0; k < ys.y().size(); ++k) {
    const Vector p = shift.psi(ys.y()[k]);
    diff = std::max(diff, (p - zs.y()[k]).norm());
    min_radius = std::min(min_radius, (shift.b + ys.y()[k]).norm());
    s1.x.push_back(ys.times()[k]);
    s1.y.push_back(p(d));
    s2.x.push_back(zs.times()[k]);
    s2.y.push_back(zs.y()[k](d));
  }
  res.checks.push_back(at_most("sup_t |psi(y_t) - z_t|", diff, tol));
  if (automatic) res.checks.push_back(at_least("min_t |b + y_t|", min_radius, shift.r_min));
  write_svg_plot(output_path(cfg, "changevar.svg"), {"Log-radius along both routes", "t", "rho", false}, {s1, s2});

  std::vector<double> b(shift.b.data(), shift.b.data() + shift.b.size());
  res.report = {{"sup_difference", diff}, {"shift", b}, {"radius", radius}, {"min_radius", min_radius},
                {"steps", ys.diagnostics.steps}};
  write_report(cfg, res);
  return res;
}

CommandResult cmd_decompose(const ExperimentConfig& cfg) {
  CommandResult res;
  const RoughPath x = make_driver(cfg.driver, cfg.T, cfg.seed);
  const Decomposition dec = decompose(x);
  const double defect = geometricity_defect(x);
  const double scale = std::max(1.0, x.level2_data().cwiseAbs().maxCoeff());
  res.checks.push_back(at_most("geometric part defect (relative)", geometricity_defect(dec.geometric) / scale, 1e-12));
  const RoughPath back = recompose(dec.geometric, dec.drift);
  const double roundtrip = std::max((back.level1_data() - x.level1_data()).cwiseAbs().maxCoeff(),
                                    (back.level2_data() - x.level2_data()).cwiseAbs().maxCoeff());
  res.checks.push_back(at_most("recompose(decompose(x)) - x", roundtrip, 1e-13));

  const std::string type = cfg.driver.value("type", "");
  const int m = x.dim();
  const double T = x.end_time() - x.start_time();
  if (type == "brownian") {
    const std::string conv = cfg.driver.value("convention", "ito");
    if (conv == "ito") {
      const double dev = (dec.drift.beta.back() + 0.5 * T * Matrix::Identity(m, m)).norm() / T;
      res.checks.push_back(at_most("|beta(T) + T I/2| / T", dev, cfg.param("ito_tol").get<double>()));
    } else {
      res.checks.push_back(at_most("geometricity defect", defect, cfg.param("strat_tol").get<double>()));
    }
  } else if (type == "pure_area") {
    const Matrix rate = x.increment(0, x.size() - 1).level2() / T;
    double err = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      err = std::max(err, (dec.drift.beta[k] - (x.times()[k] - x.start_time()) * sym_part(rate)).cwiseAbs().maxCoeff());
    }
    res.checks.push_back(at_most("|beta(t) - t sym(A)|", err, 1e-13));
  }

  write_drift_csv(output_path(cfg, "drift.csv"), dec.drift, csv_stride(cfg, x.size()));
  std::vector<Series> series;
  const std::size_t stride = std::max<std::size_t>(1, x.size() / 2000);
  for (int i = 0; i < m; ++i) {
    Series s{"beta_" + std::to_string(i + 1) + std::to_string(i + 1), {}, {}};
    for (std::size_t k = 0; k < x.size(); k += stride) {
      s.x.push_back(x.times()[k]);
      s.y.push_back(dec.drift.beta[k](i, i));
    }
    series.push_back(std::move(s));
  }
  if (type == "brownian" && cfg.driver.value("convention", "ito") == "ito") {
    series.push_back({"-t/2", {x.start_time(), x.end_time()}, {0.0, -0.5 * T}});
  }
  write_svg_plot(output_path(cfg, "drift.svg"), {"Area drift (diagonal)", "t", "beta", false}, series);

  res.report = {{"geometricity_defect", defect}, {"points", x.size()}, {"dim", m}};
  write_report(cfg, res);
  return res;
}

CommandResult cmd_convergence(const ExperimentConfig& cfg) {
  CommandResult res;
  const std::string problem = cfg.param("problem").get<std::string>();
  const auto levels = cfg.param("mesh_levels").get<std::vector<int>>();
  const double min_order = cfg.param("min_order").get<double>();
  const double T = cfg.T;

  VectorField f;
  Vector a;
  Matrix A;
  if (problem == "exp") {
    f = identity_field(1);
    a = Vector::Ones(1);
    A = Matrix::Identity(1, 1);
  } else if (problem == "matrix") {
    A.resize(2, 2);
    A << -0.5, 1.0, -1.0, -0.2;
    f = linear_field({A});
    a = Vector(2);
    a << 1.0, 0.5;
  } else if (problem == "zero") {
    f = zero_field(1, 1);
    a = Vector::Ones(1);
    A = Matrix::Zero(1, 1);
  } else {
    throw std::invalid_argument("convergence: unknown problem '" + problem + "'");
  }
  const RoughPath x = lift_piecewise_linear({Vector::Zero(1), Vector::Constant(1, T)}, {0.0, T});

  std::vector<double> errors;
  for (int level : levels) {
    SolverConfig s = cfg.solver;
    s.mesh_level = level;
    const RDESolution sol = solve_rde(x, f, a, T, s);
    double err = 0.0;
    for (std::size_t k = 0; k < sol.y().size(); ++k) {
      const Matrix E = (A * sol.times()[k]).exp();
      err = std::max(err, (sol.y()[k] - E * a).norm());
    }
    errors.push_back(err);
  }

  std::vector<double> orders;
  std::ofstream os(output_path(cfg, "convergence_" + problem + ".csv"));
  os << std::setprecision(17) << "mesh_level,h,sup_error,order\n";
  bool monotone = true;
  for (std::size_t k = 0; k < levels.size(); ++k) {
    double order = std::numeric_limits<double>::quiet_NaN();
    if (k > 0 && errors[k] > 1e-13 && errors[k - 1] > 1e-13) {
      order = std::log2(errors[k - 1] / errors[k]) / (levels[k] - levels[k - 1]);
      orders.push_back(order);
    }
    if (k > 0 && errors[k] > errors[k - 1]) monotone = false;
    os << levels[k] << ',' << std::ldexp(1.0, -levels[k]) << ',' << errors[k] << ',' << order << '\n';
  }
  const double max_err = *std::max_element(errors.begin(), errors.end());
  if (max_err == 0.0) {
    res.checks.push_back(at_most("sup error at every mesh", 0.0, 0.0));
  } else {
    const double worst = orders.empty() ? std::numeric_limits<double>::quiet_NaN()
                                        : *std::min_element(orders.begin(), orders.end());
    res.checks.push_back(at_least("smallest observed order", worst, min_order));
    res.checks.push_back({"errors decrease monotonically", monotone ? 1.0 : 0.0, 1.0, monotone});
  }
  Series s{"sup error", {}, {}, true};
  for (std::size_t k = 0; k < levels.size(); ++k) {
    s.x.push_back(levels[k]);
    s.y.push_back(errors[k]);
  }
  write_svg_plot(output_path(cfg, "convergence_" + problem + ".svg"),
                 {"Mesh refinement: " + problem, "mesh level (h = 2^-level)", "sup error", max_err > 0.0}, {s});
  res.report = {{"problem", problem}, {"levels", levels}, {"errors", errors}, {"orders", orders}};
  write_report(cfg, res);
  return res;
}

CommandResult cmd_lift(const ExperimentConfig& cfg) {
  CommandResult res;
  std::string input = cfg.param("input").get<std::string>();
  if (input.empty() && cfg.driver.value("type", "") == "csv") input = cfg.driver.at("path").get<std::string>();
  if (input.empty()) throw std::invalid_argument("lift: set 'input' to a polyline CSV (t,x1,...,xm)");
  const Polyline poly = read_polyline_csv(input);
  const RoughPath rp = lift_piecewise_linear(poly.points, poly.times);
  if (rp.size() >= 3) res.checks.push_back(at_most("chen defect", chen_defect(rp), 1e-12));
  res.checks.push_back(at_most("geometricity defect", geometricity_defect(rp), 1e-12));
  write_rough_path_csv(output_path(cfg, "rough_path.csv"), rp);
  res.report = {{"input", input}, {"points", rp.size()}, {"dim", rp.dim()}};
  write_report(cfg, res);
  return res;
}

CommandResult cmd_solve(const ExperimentConfig& cfg) {
  CommandResult res;
  const VectorField f = make_field(cfg.field);
  const SecondOrderField f2 = make_second_order(cfg.field, f);
  const RoughPath x = make_driver(cfg.driver, cfg.T, cfg.seed);
  const Vector a = initial_value(cfg, f.dim_state());
  const RDESolution sol = solve_rde(x, f, f2, a, cfg.T, cfg.solver);

  double cross_scale = 1.0;
  for (std::size_t k = 1; k < sol.path.size(); ++k) {
    cross_scale = std::max(cross_scale, sol.path.cross(0, k).cwiseAbs().maxCoeff());
  }
  res.checks.push_back(at_most("cross additivity defect (relative)", sol.path.additivity_defect() / cross_scale, 1e-12));
  if (!sol.blowup) res.checks.push_back(at_most("sup |y|", sol.sup_norm(), cfg.solver.r_max));

  write_solution_csv(output_path(cfg, "solution.csv"), sol, csv_stride(cfg, sol.y().size()));
  if (sol.blowup) write_blowup_json(output_path(cfg, "blowup.json"), *sol.blowup);
  res.report = {{"steps", sol.diagnostics.steps},
                {"driver_pvar_norm", sol.diagnostics.driver_pvar_norm},
                {"sup_norm", sol.sup_norm()},
                {"blowup", sol.blowup.has_value()}};
  if (sol.blowup) res.report["crossing_time"] = sol.blowup->crossing_time;
  write_report(cfg, res);
  return res;
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"explosion-demo", "growth-demo", "changevar-check", "decompose",
                                                 "convergence",    "lift",        "solve"};
  return names;
}

CommandResult run_command(const ExperimentConfig& cfg) {
  const std::string& c = cfg.command;
  if (c == "explosion-demo") return cmd_explosion_demo(cfg);
  if (c == "growth-demo") return cmd_growth_demo(cfg);
  if (c == "changevar-check") return cmd_changevar_check(cfg);
  if (c == "decompose") return cmd_decompose(cfg);
  if (c == "convergence") return cmd_convergence(cfg);
  if (c == "lift") return cmd_lift(cfg);
  if (c == "solve") return cmd_solve(cfg);
  throw std::invalid_argument("unknown command '" + c + "'");
}

void print_result(const CommandResult& result, std::ostream& os) {
  for (const auto& c : result.checks) {
    os << (c.passed ? "[PASS] " : "[FAIL] ") << c.name << ": " << std::setprecision(6) << c.value
       << " (threshold " << c.threshold << ")\n";
  }
  os << (result.passed() ? "all checks passed" : "some checks FAILED") << '\n';
}

}  // namespace rough::experiments
