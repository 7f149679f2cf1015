// Whole-trajectory driver on top of the single-step engines.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rtsa/diagnostics.hpp"
#include "rtsa/problems.hpp"
#include "rtsa/schedules.hpp"
#include "rtsa/step.hpp"

namespace rtsa {

struct RecordPolicy {
  enum class Kind { Full, Thinned, FinalOnly };
  Kind kind = Kind::FinalOnly;
  std::uint64_t every = 1;  // Thinned only

  static RecordPolicy full() { return {Kind::Full, 1}; }
  static RecordPolicy thinned(std::uint64_t k) { return {Kind::Thinned, k < 1 ? 1 : k}; }
  static RecordPolicy final_only() { return {Kind::FinalOnly, 1}; }
};

struct TrajectoryOptions {
  std::uint64_t n_steps = 1000;
  Point x0;
  ResetPolicy reset = ResetPolicy::InitialPoint;
  RecordPolicy record = RecordPolicy::final_only();
  double divergence_threshold = 1e6;
  std::vector<double> monitor_radii;
  double window_fraction = 0.1;
  double stabilization_fraction = 0.1;

  /// First step of the oscillation window: n_steps - ceil(window_fraction * n_steps).
  std::uint64_t window_start() const;
};

struct Trajectory {
  Algorithm algorithm = Algorithm::Chen;
  std::uint64_t seed = 0;
  TrajectoryStatus status = TrajectoryStatus::Completed;
  std::string abort_reason;
  std::uint64_t steps_completed = 0;
  Point final_x;
  std::uint64_t final_sigma = 0;
  double final_error = 0.0;
  std::vector<std::uint64_t> truncation_steps;
  /// max_n |X_n - center of the compacts|, X_0 included.
  double max_distance = 0.0;
  std::vector<TracePoint> trace;
  std::vector<StepRecord> records;  // Full policy only
  std::vector<MartingaleMonitor> monitors;
  double wall_time_ms = 0.0;
};

/// Runs `options.n_steps` steps from X_0 with a NormalStream seeded by
/// `seed`. Numerical blow-up ends the run with a status; it never throws for
/// that. Throws std::invalid_argument when X_0 is outside K_0 for Chen runs
/// or dimensions disagree.
Trajectory run_trajectory(const StochasticProblem& problem, Algorithm algorithm,
                          const GainSchedule& schedule, const CompactFamily& compacts,
                          const TrajectoryOptions& options, std::uint64_t seed);

/// Row for the summary table; the first monitor supplies the primary
/// martingale columns.
TrajectorySummary summarize(const Trajectory& traj, std::uint64_t trajectory_index,
                            const CompactFamily& compacts, const TrajectoryOptions& options);

}  // namespace rtsa
