#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "rough/experiments.hpp"
#include "rough/io.hpp"

namespace rough::experiments {

// Keys of the form "command:key" override the plain key for that command.
const std::vector<Default>& defaults() {
  static const std::vector<Default> table = {
      {"T", "1.0", "time horizon"},
      {"seed", "42", "random seed (drivers, Brownian paths)"},
      {"p", "2.0", "p-variation exponent, 2 <= p < 3"},
      {"mesh_level", "10", "uniform step 2^-mesh_level; negative steps on the driver grid"},
      {"K", "1.0", "step-rule constant K"},
      {"mu", "1.0", "step-rule constant mu"},
      {"tol_sew", "1e-10", "sewing tolerance"},
      {"r_max", "1e6", "explosion threshold on |y|"},
      {"max_steps", "16777216", "largest admissible number of steps"},
      {"csv_max_rows", "4096", "trajectory CSVs are decimated to about this many rows"},
      {"field", R"({"name":"counterexample"})", "vector field"},
      {"driver", R"({"type":"random_polyline","dim":1,"segments":10,"scale":1.0})", "driver"},
      {"a", "[1.0, 0.0]", "initial value"},
      {"explosion-demo:a1_values", "[1.0, 2.0]", "first coordinates of the initial values"},
      {"explosion-demo:mesh_level", "20", "mesh of the explosion runs"},
      {"explosion-demo:fit_fraction", "0.9", "trajectory compared with a1/(1-a1 t) for t <= fraction/a1"},
      {"explosion-demo:rel_tol", "1e-4", "relative trajectory tolerance"},
      {"explosion-demo:window", "0.05", "accepted |crossing - 1/a1|"},
      {"growth-demo:T", "5.0", "horizon of the growth sweep"},
      {"growth-demo:lambdas", "[1.0, 2.0, 4.0, 8.0]", "driver dilations"},
      {"changevar-check:tolerance", "1e-4", "accepted sup |psi(y) - z|"},
      {"changevar-check:shift", R"("auto")", "\"auto\" (b from the a-posteriori radius) or a vector b"},
      {"decompose:driver", R"({"type":"brownian","dim":2,"steps":100000,"convention":"ito"})", "driver"},
      {"decompose:ito_tol", "0.05", "accepted |beta(T) + T I/2| / T for Ito lifts"},
      {"decompose:strat_tol", "0.02", "accepted geometricity defect for Stratonovich lifts"},
      {"convergence:problem", R"("exp")", "\"exp\" (f(y)=y, x=t), \"matrix\" (linear 2x2, x=t) or \"zero\""},
      {"convergence:mesh_levels", "[4, 5, 6, 7, 8, 9, 10, 11, 12]", "meshes of the sweep"},
      {"convergence:min_order", "1.0", "smallest accepted observed order"},
      {"lift:input", R"("")", "polyline CSV (t,x1,...,xm) to lift"},
  };
  return table;
}

namespace {

std::optional<json> lookup_default(const std::string& command, const std::string& key) {
  std::optional<json> plain;
  for (const auto& d : defaults()) {
    if (d.key == command + ":" + key) return json::parse(d.value);
    if (d.key == key) plain = json::parse(d.value);
  }
  return plain;
}

json get(const std::string& command, const json& j, const std::string& key) {
  if (j.contains(key)) return j.at(key);
  if (auto d = lookup_default(command, key)) return *d;
  return json();
}

}  // namespace

std::string defaults_table() {
  std::ostringstream os;
  os << "Config keys and defaults (\"command:key\" applies to that command only):\n";
  for (const auto& d : defaults()) {
    os << "  " << d.key;
    for (std::size_t i = d.key.size(); i < 28; ++i) os << ' ';
    os << d.value << "\n      " << d.description << '\n';
  }
  return os.str();
}

json ExperimentConfig::param(const std::string& key) const { return get(command, extra, key); }

ExperimentConfig config_from_json(const std::string& command, const json& j) {
  ExperimentConfig cfg;
  cfg.command = command;
  cfg.extra = j;
  cfg.field = get(command, j, "field");
  cfg.driver = get(command, j, "driver");
  cfg.a = get(command, j, "a").get<std::vector<double>>();
  cfg.T = get(command, j, "T").get<double>();
  cfg.seed = get(command, j, "seed").get<std::uint64_t>();
  cfg.solver.p = get(command, j, "p").get<double>();
  cfg.solver.mesh_level = get(command, j, "mesh_level").get<int>();
  cfg.solver.K = get(command, j, "K").get<double>();
  cfg.solver.mu = get(command, j, "mu").get<double>();
  cfg.solver.tol_sew = get(command, j, "tol_sew").get<double>();
  cfg.solver.r_max = get(command, j, "r_max").get<double>();
  cfg.solver.max_steps = get(command, j, "max_steps").get<std::size_t>();
  if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
  if (!(cfg.T > 0.0)) throw std::invalid_argument("config: T must be positive");
  return cfg;
}

ExperimentConfig load_config(const std::string& command, const std::optional<std::string>& path,
                             const std::optional<std::string>& out_dir,
                             const std::optional<std::uint64_t>& seed) {
  json j = json::object();
  if (path) {
    std::ifstream is(*path);
    if (!is) throw std::runtime_error("cannot read config " + *path);
    try {
      is >> j;
    } catch (const json::exception& e) {
      throw std::runtime_error("config " + *path + ": " + e.what());
    }
    if (!j.is_object()) throw std::runtime_error("config " + *path + ": top level must be an object");
  }
  if (out_dir) j["out_dir"] = *out_dir;
  if (seed) j["seed"] = *seed;
  return config_from_json(command, j);
}

// ---------------------------------------------------------------------------
// Fields and drivers

namespace {

Matrix matrix_from(const json& j) {
  const auto rows = j.get<std::vector<std::vector<double>>>();
  if (rows.empty()) throw std::invalid_argument("config: empty matrix");
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.front().size()) throw std::invalid_argument("config: ragged matrix");
    for (std::size_t k = 0; k < rows[i].size(); ++k) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
  }
  return m;
}

Vector vector_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// "A": one matrix per driver column; "c": optional offsets.
std::pair<std::vector<Matrix>, std::vector<Vector>> columns_from(const json& spec) {
  std::vector<Matrix> A;
  std::vector<Vector> c;
  for (const auto& a : spec.at("A")) A.push_back(matrix_from(a));
  if (spec.contains("c")) {
    for (const auto& v : spec.at("c")) c.push_back(vector_from(v));
  }
  return {A, c};
}

}  // namespace

VectorField make_field(const json& spec) {
  const std::string name = spec.value("name", "");
  if (name == "counterexample") return counterexample_field();
  if (name == "identity") return identity_field(spec.value("d", 1));
  if (name == "zero") return zero_field(spec.value("d", 1), spec.value("m", 1));
  if (name == "linear") {
    const auto [A, c] = columns_from(spec);
    return linear_field(A, c);
  }
  if (name == "tanh") {
    const auto [A, c] = columns_from(spec);
    return tanh_field(A, c);
  }
  throw std::invalid_argument("unknown field '" + name + "'");
}

SecondOrderField make_second_order(const json& spec, const VectorField& f) {
  if (spec.value("name", "") == "counterexample") return counterexample_second_order();
  return f_dot_grad_f(f);
}

RoughPath make_driver(const json& spec, double T, std::uint64_t seed) {
  const std::string type = spec.value("type", "");
  if (type == "random_polyline") {
    const int dim = spec.value("dim", 1);
    const int segments = spec.value("segments", 10);
    const double scale = spec.value("scale", 1.0);
    if (dim < 1 || segments < 1) throw std::invalid_argument("random_polyline: need dim, segments >= 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> times;
    std::vector<Vector> points;
    const double h = T / segments;
    Vector x = Vector::Zero(dim);
    for (int k = 0; k <= segments; ++k) {
      times.push_back(k * h);
      if (k > 0) {
        for (int i = 0; i < dim; ++i) x(i) += scale * std::sqrt(h) * normal(rng);
      }
      points.push_back(x);
    }
    return lift_piecewise_linear(points, times);
  }
  if (type == "linear") {
    const Vector v = vector_from(spec.at("direction"));
    return lift_piecewise_linear({Vector::Zero(v.size()), T * v}, {0.0, T});
  }
  if (type == "polyline") {
    std::vector<Vector> points;
    for (const auto& p : spec.at("points")) points.push_back(vector_from(p));
    return lift_piecewise_linear(points, spec.at("times").get<std::vector<double>>());
  }
  if (type == "csv") {
    const std::string path = spec.at("path").get<std::string>();
    if (spec.value("format", "polyline") == "rough_path") return read_rough_path_csv(path);
    const Polyline poly = read_polyline_csv(path);
    return lift_piecewise_linear(poly.points, poly.times);
  }
  if (type == "brownian") {
    const std::string conv = spec.value("convention", "ito");
    if (conv != "ito" && conv != "stratonovich") {
      throw std::invalid_argument("brownian: convention must be ito or stratonovich");
    }
    return brownian_lift(spec.value("seed", seed), spec.value("steps", 100000), T, spec.value("dim", 2),
                         conv == "ito" ? Convention::Ito : Convention::Stratonovich);
  }
  if (type == "pure_area") {
    const Matrix rate = spec.contains("rate") ? matrix_from(spec.at("rate")) : Matrix::Identity(1, 1);
    return pure_area_path({0.0, T}, rate);
  }
  throw std::invalid_argument("unknown driver type '" + type + "'");
}

}  // namespace rough::experiments
