#pragma once

#include "semitoric/geometry.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace semitoric {

struct Axis {
  double lo = 0.0, hi = 0.0;
  int count = 1;
};

struct RunConfig {
  std::string command;
  nlohmann::json system;
  std::string out;  // empty: stdout
  std::string format = "json";
  std::uint64_t seed = 1;
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double log_cut = 3.14159265358979323846;
  double radius = 0.05;
  int steps = 64;
  int turns = 1;
  bool clockwise = false;
  std::vector<double> center{0.0, 0.0};
  std::vector<double> fixed;
  std::vector<Axis> grid;
  int taylor_degree = 3;
  std::optional<std::vector<double>> seed_point;
  int target_rank = 0;
  int threads = 1;
};

/// "a:b:n,c:d:m,..."
std::vector<Axis> parse_grid(const std::string& text);
std::vector<double> parse_list(const std::string& text);

/// Builtin name, inline JSON object, or path to a JSON file.
nlohmann::json resolve_system_argument(const std::string& arg);
HamiltonianSystem system_from_json(const nlohmann::json& spec);

/// Applies the keys of a config object; unknown keys are a config error.
void apply_config_json(RunConfig& cfg, const nlohmann::json& j);
void validate_config(const RunConfig& cfg);

/// Builds the config from argv. Returns nullopt when help was printed.
std::optional<RunConfig> parse_command_line(int argc, const char* const* argv, std::ostream& out);

/// Executes the command; 0 success, 1 config error, 2 numeric failure.
int run(const RunConfig& cfg, std::ostream& err);

int cli_main(int argc, const char* const* argv);

}  // namespace semitoric
