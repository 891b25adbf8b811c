#include "rough/io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace rough {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << std::setprecision(17);
  return os;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path);
  return is;
}

void write_values(std::ostream& os, const Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) os << ',' << v(i);
}

void write_matrix_rowmajor(std::ostream& os, const Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) os << ',' << m(i, j);
  }
}

std::string names(const std::string& prefix, int n) {
  std::string out;
  for (int i = 1; i <= n; ++i) out += "," + prefix + std::to_string(i);
  return out;
}

std::string pair_names(const std::string& prefix, int rows, int cols) {
  std::string out;
  for (int i = 1; i <= rows; ++i) {
    for (int j = 1; j <= cols; ++j) out += "," + prefix + std::to_string(i) + "_" + std::to_string(j);
  }
  return out;
}

bool is_blank(const std::string& line) { return line.find_first_not_of(" \t\r") == std::string::npos; }

// Reads all numeric rows after the header; every row must have `width` fields.
std::vector<std::vector<double>> read_rows(const std::string& path, std::size_t* width) {
  auto is = open_in(path);
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error(path + ": empty file");
  std::size_t header_fields = 1;
  for (char c : line) header_fields += c == ',';
  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    std::vector<double> row;
    try {
      row = parse_csv_numbers(line);
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (row.size() != header_fields) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected " +
                               std::to_string(header_fields) + " fields, found " +
                               std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  *width = header_fields;
  return rows;
}

}  // namespace

std::vector<double> parse_csv_numbers(const std::string& line) {
  std::vector<double> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(field, &used);
    } catch (const std::exception&) {
      throw std::runtime_error("not a number: '" + field + "'");
    }
    if (!is_blank(field.substr(used))) throw std::runtime_error("trailing characters in '" + field + "'");
    out.push_back(v);
  }
  if (!line.empty() && line.back() == ',') throw std::runtime_error("empty trailing field");
  return out;
}

Polyline read_polyline_csv(const std::string& path) {
  std::size_t width = 0;
  const auto rows = read_rows(path, &width);
  if (width < 2) throw std::runtime_error(path + ": need columns t,x1,...");
  if (rows.empty()) throw std::runtime_error(path + ": no data rows");
  Polyline poly;
  for (const auto& r : rows) {
    if (!poly.times.empty() && !(r[0] > poly.times.back())) {
      throw std::runtime_error(path + ": times must be strictly increasing");
    }
    poly.times.push_back(r[0]);
    poly.points.push_back(Eigen::Map<const Vector>(r.data() + 1, static_cast<Eigen::Index>(width - 1)));
  }
  return poly;
}

void write_polyline_csv(const std::string& path, const Polyline& poly) {
  auto os = open_out(path);
  const int m = poly.points.empty() ? 0 : static_cast<int>(poly.points.front().size());
  os << 't' << names("x", m) << '\n';
  for (std::size_t k = 0; k < poly.times.size(); ++k) {
    os << poly.times[k];
    write_values(os, poly.points[k]);
    os << '\n';
  }
}

void write_rough_path_csv(const std::string& path, const RoughPath& rp) {
  auto os = open_out(path);
  const int m = rp.dim();
  os << "s,t" << names("x", m) << pair_names("x", m, m) << '\n';
  for (std::size_t k = 0; k + 1 < rp.size(); ++k) {
    const GroupElement2 inc = rp.increment(k, k + 1);
    os << rp.times()[k] << ',' << rp.times()[k + 1];
    write_values(os, inc.level1());
    write_matrix_rowmajor(os, inc.level2());
    os << '\n';
  }
}

RoughPath read_rough_path_csv(const std::string& path) {
  std::size_t width = 0;
  const auto rows = read_rows(path, &width);
  // width = 2 + m + m²
  int m = 0;
  while (static_cast<std::size_t>(2 + m + m * m) < width) ++m;
  if (static_cast<std::size_t>(2 + m + m * m) != width || m == 0) {
    throw std::runtime_error(path + ": column count is not 2 + m + m*m");
  }
  if (rows.empty()) throw std::runtime_error(path + ": no data rows");
  std::vector<double> times{rows.front()[0]};
  std::vector<GroupElement2> incs;
  for (const auto& r : rows) {
    if (r[0] != times.back()) throw std::runtime_error(path + ": cells are not contiguous");
    times.push_back(r[1]);
    Vector l1 = Eigen::Map<const Vector>(r.data() + 2, m);
    Matrix l2(m, m);
    for (int a = 0; a < m; ++a) {
      for (int b = 0; b < m; ++b) l2(a, b) = r[static_cast<std::size_t>(2 + m + a * m + b)];
    }
    incs.emplace_back(std::move(l1), std::move(l2));
  }
  return RoughPath::from_increments(std::move(times), incs);
}

void write_partial_csv(const std::string& path, const PartialRoughPath& prp) {
  auto os = open_out(path);
  const int d = prp.dim_y(), m = prp.dim_x();
  os << "s,t" << names("y", d) << names("x", m) << pair_names("c", d, m) << '\n';
  for (std::size_t k = 0; k + 1 < prp.size(); ++k) {
    os << prp.times()[k] << ',' << prp.times()[k + 1];
    write_values(os, prp.y_increment(k, k + 1));
    write_values(os, prp.x_increment(k, k + 1));
    write_matrix_rowmajor(os, prp.cross(k, k + 1));
    os << '\n';
  }
}

void write_solution_csv(const std::string& path, const RDESolution& sol, std::size_t stride) {
  auto os = open_out(path);
  const auto& ys = sol.y();
  os << 't' << names("y", static_cast<int>(ys.front().size())) << '\n';
  if (stride == 0) stride = 1;
  for (std::size_t k = 0; k < ys.size(); ++k) {
    if (k % stride != 0 && k + 1 != ys.size()) continue;
    os << sol.times()[k];
    write_values(os, ys[k]);
    os << '\n';
  }
}

void write_drift_csv(const std::string& path, const AreaDrift& drift, std::size_t stride) {
  auto os = open_out(path);
  const int m = drift.beta.empty() ? 0 : static_cast<int>(drift.beta.front().rows());
  os << 't' << pair_names("b", m, m) << '\n';
  if (stride == 0) stride = 1;
  for (std::size_t k = 0; k < drift.times.size(); ++k) {
    if (k % stride != 0 && k + 1 != drift.times.size()) continue;
    os << drift.times[k];
    write_matrix_rowmajor(os, drift.beta[k]);
    os << '\n';
  }
}

void write_blowup_json(const std::string& path, const BlowupRecord& rec) {
  nlohmann::json j = {{"threshold", rec.threshold},
                      {"crossing_time", rec.crossing_time},
                      {"last_value_norm", rec.last_value_norm},
                      {"note", rec.note}};
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << j.dump(2) << '\n';
}

}  // namespace rough
