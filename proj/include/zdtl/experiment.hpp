#pragma once

// Experiment plumbing shared by the command-line tool and the Python module:
// flat key=value configs, the seven commands, and canonical JSON output.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "zdtl/comparison.hpp"

namespace zdtl::experiment {

/// Bad or unknown configuration; the CLI exits with status 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using Settings = std::map<std::string, std::string>;

/// Every accepted key, in the spelling used by config files ("r_inner").
const std::vector<std::string>& known_keys();

/// Lines "key = value"; '#' starts a comment. Dashes in keys read as
/// underscores. Unknown keys and repeated keys are rejected.
Settings parse_config_text(const std::string& text);

struct ExperimentConfig {
  std::size_t d = 1;
  std::size_t m = 0;           // torus dimension; 0 means the default system's
  std::vector<double> alpha;   // d*m entries row by row; empty means the default system
  std::vector<double> center;  // marker center; empty means the origin
  std::optional<double> r_inner, r_outer;
  std::optional<double> H, s;
  std::int64_t N = 3;
  double epsilon = 0.2;
  std::uint64_t seed = 1;
  std::size_t samples = 1000;
  std::size_t trials = 100;  // tiling invariant draws, lattice bodies
  double r = 1;              // lattice neighbourhood radius
  std::int64_t M_cap = 4096;
  std::vector<double> x;         // tiling base point; empty means drawn from the seed
  std::vector<double> viewport;  // x0,y0,x1,y1
  double nudge = 1e-6;  // continuity check: distance of the nearby point
  double stroke = 0.05;
  double radius = 0;  // overlay ball in the SVG
  std::string set, E, F;  // ball lists "c1,c2:r;c1,c2:r"
  std::string out = "-";
  std::string format = "json";

  /// Keys that were set explicitly (marker keys decide whether a marker is planned).
  std::vector<std::string> given;
  bool has(const std::string& key) const;
};

/// Parses and validates; the action, marker and tiling parameters are built
/// once so every module-level invariant is checked at load.
ExperimentConfig load_config(const Settings& settings);

dynsys::RotationAction make_action(const ExperimentConfig& cfg);
comparison::OpenSet parse_set(const std::string& text, std::size_t m);

struct RunResult {
  int exit_code = 0;  // 0 every check passed, 1 some check failed
  std::string output;
};

const std::vector<std::string>& commands();

/// Runs one command. Throws ConfigError (or zdtl::Error for parameters the
/// constructions reject) when the run cannot start.
RunResult run(const std::string& command, const ExperimentConfig& cfg);

/// Sorted keys, two-space indent, floats with 17 significant digits, and
/// non-finite floats as null.
std::string canonical_json(const nlohmann::json& j);

}  // namespace zdtl::experiment
