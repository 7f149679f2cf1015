// Ensembles of independent trajectories.
//
// run_ensemble_serial is the reference loop; run_ensemble spreads the same
// per-trajectory kernel over OpenMP threads. Each trajectory's stream is
// derived from (master_seed, index), and results are stored by index, so
// both produce identical rows for any worker count.
#pragma once

#include <cstdint>
#include <vector>

#include "rtsa/config.hpp"
#include "rtsa/diagnostics.hpp"
#include "rtsa/trajectory.hpp"

namespace rtsa {

struct EnsembleSpec {
  StochasticProblem problem;
  GainSchedule schedule;
  CompactFamily compacts;
  TrajectoryOptions options;
  AlgorithmChoice algorithm = AlgorithmChoice::Chen;
  std::uint64_t n_trajectories = 1;
  std::uint64_t master_seed = 0;
  /// Keep full Trajectory objects (traces, monitors) in the result.
  bool keep_trajectories = false;

  static EnsembleSpec from_config(const ExperimentConfig& cfg);

  std::vector<Algorithm> algorithms() const;
};

struct EnsembleResult {
  /// Ordered by trajectory index, then algorithm (chen before rm).
  std::vector<TrajectorySummary> rows;
  /// Parallel to rows when keep_trajectories is set, empty otherwise.
  std::vector<Trajectory> trajectories;
  std::vector<std::uint64_t> seeds;
};

EnsembleResult run_ensemble_serial(const EnsembleSpec& spec);

/// workers <= 0 uses the OpenMP default. Without OpenMP this is the serial loop.
EnsembleResult run_ensemble(const EnsembleSpec& spec, int workers);

/// Bound on E|U|^2 over the ball B(x*, q): analytic when the problem knows
/// it, otherwise a Monte Carlo estimate plus five standard errors.
double second_moment_on_ball(const StochasticProblem& problem, double q, std::uint64_t seed);

/// multiplier * sqrt(predicted bracket tail from the window start), one per q.
std::vector<double> tail_tolerances(const EnsembleSpec& spec, double multiplier);

/// One report per algorithm present; in paired runs the Chen report carries
/// the RM divergence fraction.
std::vector<EnsembleReport> build_reports(const EnsembleResult& result, const EnsembleSpec& spec,
                                          const std::vector<double>& tolerances,
                                          double tail_multiplier);

}  // namespace rtsa
