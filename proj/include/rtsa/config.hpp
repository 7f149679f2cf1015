// Experiment configuration: a flat text file of dotted keys.
//
//   # comment
//   problem.name = cubic
//   problem.dim  = 3
//   x0           = 0.5, 0, 0
//   gain.alpha   = 1
//
// One `key = value` (or `key: value`) per line; `#` starts a comment;
// vectors are comma separated, optionally wrapped in [ ]. Unknown and
// duplicate keys are errors. README.md lists every key.
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rtsa/problems.hpp"
#include "rtsa/schedules.hpp"
#include "rtsa/trajectory.hpp"

namespace rtsa {

/// Syntax or validation failure. `what()` carries the position
/// (file:line:col) for syntax errors and the key for validation errors.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class AlgorithmChoice { Chen, RobbinsMonro, BothPaired };

std::string_view to_string(AlgorithmChoice a);

struct ExperimentConfig {
  // problem
  std::string problem_name = "cubic";
  std::size_t dim = 1;
  Point x_star;
  std::vector<double> matrix;  // row-major, linear only
  NoiseModel noise;

  AlgorithmChoice algorithm = AlgorithmChoice::Chen;
  Point x0;
  ResetPolicy reset = ResetPolicy::InitialPoint;

  double gain_a = 1.0;
  double gain_b = 0.0;
  double gain_alpha = 1.0;

  Point compacts_center;
  double compacts_r0 = 1.0;
  Growth compacts_growth = Growth::Geometric;
  double compacts_factor = 2.0;

  std::uint64_t n_steps = 1000;
  std::uint64_t n_trajectories = 1;
  std::uint64_t master_seed = 0;
  RecordPolicy record = RecordPolicy::final_only();
  double divergence_threshold = 1e6;

  std::string output_dir = "out";

  std::vector<double> monitor_radii;
  std::vector<double> tolerances{0.05};
  double stabilization_fraction = 0.1;
  double window_fraction = 0.1;
  double tail_multiplier = 3.0;

  std::vector<double> check_radii{0.5, 1.0, 2.0};
  std::size_t check_points_per_radius = 64;
  std::size_t check_h3_samples = 10000;
  double check_h3_radius = 0.0;

  /// Keys that were not in the file, with the value filled in.
  std::vector<std::string> applied_defaults;
  std::vector<std::string> warnings;

  /// Sorted `key = value` lines covering every setting that affects results.
  std::string canonical_text() const;
  /// SHA-256 of canonical_text(), lowercase hex.
  std::string hash() const;

  StochasticProblem make_problem() const;
  GainSchedule make_schedule() const;
  CompactFamily make_compacts() const;
  TrajectoryOptions trajectory_options() const;
};

/// Parses and validates; `source` names the input in error messages.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");

/// Throws ConfigError naming the path if the file cannot be read.
ExperimentConfig load_config(const std::string& path);

/// Applies defaults that depend on other keys and checks every constraint.
/// Called by parse_config; exposed for configs built in code.
void finalize_config(ExperimentConfig& cfg, const std::vector<std::string>& explicit_keys);

}  // namespace rtsa
