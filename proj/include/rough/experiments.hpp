#pragma once

// Experiment runners behind the `rde` command-line tool.
//
// Every command reads an ExperimentConfig (JSON, all keys optional), writes
// its tables and plots into the output directory, and returns a list of named
// checks; the tool exits nonzero iff one of them fails.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rough/rde_solver.hpp"
#include "rough/rough_path.hpp"
#include "rough/vector_field.hpp"

namespace rough::experiments {

using nlohmann::json;

struct ExperimentConfig {
  std::string command;
  /// {"name": "counterexample" | "linear" | "tanh" | "zero" | "identity", ...}
  json field;
  /// {"type": "random_polyline" | "linear" | "polyline" | "csv" | "brownian" | "pure_area", ...}
  json driver;
  std::vector<double> a;
  double T = 1.0;
  std::uint64_t seed = 42;
  std::string out_dir = ".";
  SolverConfig solver;
  /// Everything else in the file (command-specific parameters).
  json extra;

  /// extra[key] if present, else the documented default.
  json param(const std::string& key) const;
};

struct Default {
  std::string key;
  std::string value;
  std::string description;
};

/// The single table of numeric defaults (printed by --help).
const std::vector<Default>& defaults();
std::string defaults_table();

/// Defaults, then the file (if any), then command-line overrides.
ExperimentConfig load_config(const std::string& command, const std::optional<std::string>& path,
                             const std::optional<std::string>& out_dir,
                             const std::optional<std::uint64_t>& seed);
ExperimentConfig config_from_json(const std::string& command, const json& j);

VectorField make_field(const json& spec);
/// Closed-form f·∇f for the builtins that have one, else the assembled one.
SecondOrderField make_second_order(const json& spec, const VectorField& f);
RoughPath make_driver(const json& spec, double T, std::uint64_t seed);

struct Check {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool passed = false;
};

struct CommandResult {
  std::vector<Check> checks;
  json report;
  bool passed() const;
};

CommandResult cmd_explosion_demo(const ExperimentConfig& cfg);
CommandResult cmd_growth_demo(const ExperimentConfig& cfg);
CommandResult cmd_changevar_check(const ExperimentConfig& cfg);
CommandResult cmd_decompose(const ExperimentConfig& cfg);
CommandResult cmd_convergence(const ExperimentConfig& cfg);
CommandResult cmd_lift(const ExperimentConfig& cfg);
CommandResult cmd_solve(const ExperimentConfig& cfg);

const std::vector<std::string>& command_names();
CommandResult run_command(const ExperimentConfig& cfg);
/// One line per check, then a summary line.
void print_result(const CommandResult& result, std::ostream& os);

// SVG ----------------------------------------------------------------------

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  /// Markers instead of a polyline.
  bool points = false;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
};

void write_svg_plot(const std::string& path, const PlotSpec& spec, const std::vector<Series>& series);

}  // namespace rough::experiments
