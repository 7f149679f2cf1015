// Online monitors and ensemble statistics for truncated stochastic
// approximation runs.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rtsa/schedules.hpp"
#include "rtsa/step.hpp"
#include "rtsa/vec.hpp"

namespace rtsa {

/// Localised martingale partial sums
///
///   Mbar_n = sum_{i <= n} gamma_i dM_i 1{|X_{i-1} - x*| <= q}
///
/// with the running sup of |Mbar_n| and the Cauchy oscillation over a final
/// window, max_{n >= window_start} |Mbar_n - Mbar_{window_start}|.
class MartingaleMonitor {
 public:
  MartingaleMonitor(double q, std::size_t dim, std::uint64_t window_start);

  void update(const StepRecord& rec, ConstVec x_prev, ConstVec x_star);

  double q() const { return q_; }
  std::uint64_t window_start() const { return window_start_; }
  const Point& partial_sum() const { return partial_sum_; }
  double running_sup() const { return running_sup_; }
  double tail_oscillation() const { return tail_oscillation_; }
  std::uint64_t steps_inside() const { return steps_inside_; }

 private:
  double q_;
  std::uint64_t window_start_;
  Point partial_sum_;
  Point anchor_;
  double running_sup_ = 0.0;
  double tail_oscillation_ = 0.0;
  std::uint64_t steps_inside_ = 0;
};

/// Upper bound on the predictable bracket tail
///   sum_{n > from_n} gamma_n^2 * second_moment_bound.
double predicted_bracket_bound(const GainSchedule& schedule, double second_moment_bound,
                               std::uint64_t from_n);

struct StabilizationReport {
  std::uint64_t final_sigma = 0;
  std::optional<std::uint64_t> last_truncation_step;
  bool stabilized = true;
};

/// `truncation_steps` are the step indices at which sigma increased.
/// Stabilised when there is no truncation after fraction * n_steps.
StabilizationReport stabilization_report(const std::vector<std::uint64_t>& truncation_steps,
                                         std::uint64_t n_steps, double fraction = 0.1);

struct TracePoint {
  std::uint64_t step = 0;
  Point x;
  std::uint64_t sigma = 0;
  bool truncated = false;
  double error = 0.0;
};

struct ConvergenceReport {
  double final_error = 0.0;
  std::vector<double> tolerances;
  std::vector<std::optional<std::uint64_t>> first_hit_times;
  std::vector<bool> converged_flags;
};

/// For each tolerance: converged when the run completed and the final error
/// is within it; first hit is the earliest recorded step from which the
/// error stays within it until the end of the trace.
ConvergenceReport convergence_report(bool completed, double final_error,
                                     const std::vector<TracePoint>& trace,
                                     const std::vector<double>& tolerances);

/// Wilson score interval for a binomial proportion.
struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};
Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = 1.959963984540054);

enum class TrajectoryStatus { Completed, Diverged, Aborted };

std::string_view to_string(TrajectoryStatus s);
std::optional<TrajectoryStatus> parse_status(std::string_view s);

/// One row of the per-trajectory summary table.
struct TrajectorySummary {
  std::uint64_t trajectory_index = 0;
  Algorithm algorithm = Algorithm::Chen;
  std::uint64_t seed = 0;
  TrajectoryStatus status = TrajectoryStatus::Completed;
  std::uint64_t steps = 0;
  double final_error = 0.0;
  std::uint64_t final_sigma = 0;
  std::optional<std::uint64_t> last_truncation_step;
  bool stabilized = true;
  bool bounded = true;  // every iterate stayed inside K_{final sigma}
  std::vector<double> sup_martingale;    // one per monitored q
  std::vector<double> tail_oscillation;  // one per monitored q
  double wall_time_ms = 0.0;
};

struct ConvergenceFraction {
  double tolerance = 0.0;
  std::uint64_t count = 0;
  double fraction = 0.0;
  Interval wilson95;
};

struct MartingaleSummary {
  double q = 0.0;
  double sup_p50 = 0.0;
  double tail_p50 = 0.0;
  double tail_p95 = 0.0;
  double tail_max = 0.0;
  std::optional<double> tail_tolerance;
  std::optional<double> frac_within_tolerance;
};

struct EnsembleReport {
  Algorithm algorithm = Algorithm::Chen;
  std::uint64_t n_trajectories = 0;
  std::uint64_t n_completed = 0;
  std::uint64_t n_diverged = 0;
  std::uint64_t n_aborted = 0;
  double median_final_error = 0.0;
  std::vector<ConvergenceFraction> converged;
  std::map<std::uint64_t, std::uint64_t> sigma_histogram;
  std::uint64_t max_sigma = 0;
  double frac_stabilized = 0.0;
  double frac_bounded = 0.0;
  std::vector<MartingaleSummary> martingale;
  std::optional<double> rm_divergence_fraction;

  const ConvergenceFraction* at_tolerance(double tol) const;
};

struct AggregateOptions {
  std::vector<double> tolerances{0.05};
  std::vector<double> monitor_radii;
  /// Optional per-q tolerance for tail_oscillation, same order as monitor_radii.
  std::vector<double> tail_tolerances;
};

/// Folds rows of one algorithm (in the order given) into ensemble statistics.
/// Throws std::invalid_argument on an empty input.
EnsembleReport aggregate(const std::vector<TrajectorySummary>& rows, const AggregateOptions& opts);

/// Linear-interpolation quantile (type 7) of an unsorted sample.
double quantile(std::vector<double> values, double p);

}  // namespace rtsa
