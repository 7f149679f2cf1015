#include "rtsa/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rtsa {

MartingaleMonitor::MartingaleMonitor(double q, std::size_t dim, std::uint64_t window_start)
    : q_(q), window_start_(window_start), partial_sum_(dim, 0.0), anchor_(dim, 0.0) {
  if (!(q > 0.0)) throw std::invalid_argument("monitor radius q must be positive");
}

void MartingaleMonitor::update(const StepRecord& rec, ConstVec x_prev, ConstVec x_star) {
  if (distance(x_prev, x_star) <= q_) {
    ++steps_inside_;
    for (std::size_t k = 0; k < partial_sum_.size(); ++k)
      partial_sum_[k] += rec.gamma * rec.delta_m[k];
  }
  running_sup_ = std::max(running_sup_, norm(partial_sum_));
  if (rec.step == window_start_) anchor_ = partial_sum_;
  if (rec.step >= window_start_)
    tail_oscillation_ = std::max(tail_oscillation_, distance(partial_sum_, anchor_));
}

double predicted_bracket_bound(const GainSchedule& schedule, double second_moment_bound,
                               std::uint64_t from_n) {
  if (second_moment_bound == 0.0) return 0.0;
  return second_moment_bound * schedule.square_tail_bound(from_n);
}

StabilizationReport stabilization_report(const std::vector<std::uint64_t>& truncation_steps,
                                         std::uint64_t n_steps, double fraction) {
  StabilizationReport r;
  r.final_sigma = truncation_steps.size();
  if (truncation_steps.empty()) return r;
  r.last_truncation_step = truncation_steps.back();
  r.stabilized = static_cast<double>(truncation_steps.back()) <=
                 fraction * static_cast<double>(n_steps);
  return r;
}

ConvergenceReport convergence_report(bool completed, double final_error,
                                     const std::vector<TracePoint>& trace,
                                     const std::vector<double>& tolerances) {
  ConvergenceReport r;
  r.final_error = final_error;
  r.tolerances = tolerances;
  for (double tol : tolerances) {
    if (!completed || !(final_error <= tol)) {
      r.first_hit_times.push_back(std::nullopt);
      r.converged_flags.push_back(false);
      continue;
    }
    std::optional<std::uint64_t> hit;
    for (auto it = trace.rbegin(); it != trace.rend(); ++it) {
      if (!(it->error <= tol)) break;
      hit = it->step;
    }
    r.first_hit_times.push_back(hit);
    r.converged_flags.push_back(true);
  }
  return r;
}

Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

std::string_view to_string(TrajectoryStatus s) {
  switch (s) {
    case TrajectoryStatus::Completed: return "completed";
    case TrajectoryStatus::Diverged: return "diverged";
    case TrajectoryStatus::Aborted: return "aborted";
  }
  return "?";
}

std::optional<TrajectoryStatus> parse_status(std::string_view s) {
  if (s == "completed") return TrajectoryStatus::Completed;
  if (s == "diverged") return TrajectoryStatus::Diverged;
  if (s == "aborted") return TrajectoryStatus::Aborted;
  return std::nullopt;
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0) return values[lo];
  return values[lo] + frac * (values[hi] - values[lo]);
}

const ConvergenceFraction* EnsembleReport::at_tolerance(double tol) const {
  for (const auto& c : converged)
    if (c.tolerance == tol) return &c;
  return nullptr;
}

EnsembleReport aggregate(const std::vector<TrajectorySummary>& rows, const AggregateOptions& opts) {
  if (rows.empty()) throw std::invalid_argument("aggregate needs at least one trajectory");
  EnsembleReport r;
  r.algorithm = rows.front().algorithm;
  r.n_trajectories = rows.size();
  const double n = static_cast<double>(rows.size());

  std::vector<double> errors;
  std::uint64_t stabilized = 0, bounded = 0;
  for (const auto& row : rows) {
    switch (row.status) {
      case TrajectoryStatus::Completed: ++r.n_completed; break;
      case TrajectoryStatus::Diverged: ++r.n_diverged; break;
      case TrajectoryStatus::Aborted: ++r.n_aborted; break;
    }
    errors.push_back(row.status == TrajectoryStatus::Completed
                         ? row.final_error
                         : std::numeric_limits<double>::infinity());
    ++r.sigma_histogram[row.final_sigma];
    r.max_sigma = std::max(r.max_sigma, row.final_sigma);
    if (row.stabilized) ++stabilized;
    if (row.bounded) ++bounded;
  }
  r.median_final_error = quantile(errors, 0.5);
  r.frac_stabilized = static_cast<double>(stabilized) / n;
  r.frac_bounded = static_cast<double>(bounded) / n;

  for (double tol : opts.tolerances) {
    ConvergenceFraction c;
    c.tolerance = tol;
    for (const auto& row : rows)
      if (row.status == TrajectoryStatus::Completed && row.final_error <= tol) ++c.count;
    c.fraction = static_cast<double>(c.count) / n;
    c.wilson95 = wilson_interval(c.count, rows.size());
    r.converged.push_back(c);
  }

  for (std::size_t k = 0; k < opts.monitor_radii.size(); ++k) {
    MartingaleSummary m;
    m.q = opts.monitor_radii[k];
    std::vector<double> sups, tails;
    for (const auto& row : rows) {
      if (k < row.sup_martingale.size()) sups.push_back(row.sup_martingale[k]);
      if (k < row.tail_oscillation.size()) tails.push_back(row.tail_oscillation[k]);
    }
    if (tails.empty()) continue;
    m.sup_p50 = quantile(sups, 0.5);
    m.tail_p50 = quantile(tails, 0.5);
    m.tail_p95 = quantile(tails, 0.95);
    m.tail_max = *std::max_element(tails.begin(), tails.end());
    if (k < opts.tail_tolerances.size()) {
      const double tol = opts.tail_tolerances[k];
      m.tail_tolerance = tol;
      const auto within = std::count_if(tails.begin(), tails.end(), [tol](double t) { return t <= tol; });
      m.frac_within_tolerance = static_cast<double>(within) / static_cast<double>(tails.size());
    }
    r.martingale.push_back(m);
  }
  return r;
}

}  // namespace rtsa
