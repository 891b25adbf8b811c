#pragma once

// CSV / JSON exchange formats.
//
//   polyline      t,x1,...,xm                      (rows sorted by t)
//   rough path    s,t,x1..xm,x11,x12,...,xmm       (one row per grid cell, increments)
//   partial path  s,t,y1..yd,x1..xm,c11,...,cdm   (one row per grid cell, increments)
//   solution      t,y1,...,yd
//   drift         t,b11,b12,...,bmm
//
// Numbers are written with 17 significant digits, so round trips are exact.

#include <string>
#include <vector>

#include "rough/partial_rough_path.hpp"
#include "rough/rde_solver.hpp"
#include "rough/rough_path.hpp"

namespace rough {

struct Polyline {
  std::vector<double> times;
  std::vector<Vector> points;
};

/// Throws std::runtime_error with the offending line on malformed input.
Polyline read_polyline_csv(const std::string& path);
void write_polyline_csv(const std::string& path, const Polyline& poly);

void write_rough_path_csv(const std::string& path, const RoughPath& rp);
/// Composes the cell increments back into a rough path.
RoughPath read_rough_path_csv(const std::string& path);

void write_partial_csv(const std::string& path, const PartialRoughPath& prp);
/// Rows every `stride` grid points (the last point is always written).
void write_solution_csv(const std::string& path, const RDESolution& sol, std::size_t stride = 1);
void write_drift_csv(const std::string& path, const AreaDrift& drift, std::size_t stride = 1);
/// {"threshold": ..., "crossing_time": ..., "last_value_norm": ...}
void write_blowup_json(const std::string& path, const BlowupRecord& rec);

/// Splits one CSV line on commas and parses every field as a double.
std::vector<double> parse_csv_numbers(const std::string& line);

}  // namespace rough
