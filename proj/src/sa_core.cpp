#include "rtsa/trajectory.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace rtsa {

std::string_view to_string(Algorithm a) { return a == Algorithm::Chen ? "chen" : "rm"; }

std::string_view to_string(ResetPolicy r) {
  return r == ResetPolicy::InitialPoint ? "initial" : "last_valid";
}

std::uint64_t TrajectoryOptions::window_start() const {
  const auto w = static_cast<std::uint64_t>(std::ceil(window_fraction * static_cast<double>(n_steps)));
  return w >= n_steps ? 0 : n_steps - w;
}

namespace {

bool should_record(const RecordPolicy& policy, std::uint64_t step, bool truncated, bool last) {
  switch (policy.kind) {
    case RecordPolicy::Kind::Full: return true;
    case RecordPolicy::Kind::Thinned: return truncated || last || step % policy.every == 0;
    case RecordPolicy::Kind::FinalOnly: return false;
  }
  return false;
}

}  // namespace

Trajectory run_trajectory(const StochasticProblem& problem, Algorithm algorithm,
                          const GainSchedule& schedule, const CompactFamily& compacts,
                          const TrajectoryOptions& options, std::uint64_t seed) {
  const std::size_t d = problem.dim();
  if (options.x0.size() != d) throw std::invalid_argument("x0 has the wrong dimension");
  if (compacts.dim() != d) throw std::invalid_argument("compacts.center has the wrong dimension");
  if (options.n_steps < 1) throw std::invalid_argument("n_steps must be >= 1");
  if (algorithm == Algorithm::Chen && !compacts.contains(0, options.x0))
    throw std::invalid_argument("x0 must lie in K_0");

  const auto t0 = std::chrono::steady_clock::now();
  Trajectory traj;
  traj.algorithm = algorithm;
  traj.seed = seed;
  const Point& x_star = problem.root();

  NormalStream stream(seed);
  ChenState state = ChenState::start(options.x0);
  StepRecord rec(d);
  Point x_prev(d);
  const std::uint64_t window_start = options.window_start();
  for (double q : options.monitor_radii) traj.monitors.emplace_back(q, d, window_start);

  traj.max_distance = distance(state.x, compacts.center());
  if (options.record.kind != RecordPolicy::Kind::FinalOnly)
    traj.trace.push_back({0, state.x, 0, false, distance(state.x, x_star)});

  for (std::uint64_t n = 0; n < options.n_steps; ++n) {
    x_prev = state.x;
    StepOutcome outcome;
    try {
      outcome = algorithm == Algorithm::Chen
                    ? step_chen(problem, schedule, compacts, options.reset, state, rec, stream)
                    : step_rm(problem, schedule, options.divergence_threshold, state, rec, stream);
    } catch (const std::exception& e) {
      traj.status = TrajectoryStatus::Aborted;
      traj.abort_reason = e.what();
      break;
    }
    if (outcome == StepOutcome::NonfiniteOracle) {
      traj.status = TrajectoryStatus::Aborted;
      traj.abort_reason = "non-finite oracle output at step " + std::to_string(rec.step);
      break;
    }

    for (auto& m : traj.monitors) m.update(rec, x_prev, x_star);
    if (outcome == StepOutcome::Truncated) traj.truncation_steps.push_back(rec.step);
    traj.max_distance = std::max(traj.max_distance, distance(state.x, compacts.center()));

    const bool diverged = outcome == StepOutcome::Diverged;
    const bool last = diverged || state.n == options.n_steps;
    if (should_record(options.record, rec.step, rec.truncated, last)) {
      traj.trace.push_back({rec.step, state.x, state.sigma, rec.truncated, distance(state.x, x_star)});
      if (options.record.kind == RecordPolicy::Kind::Full) traj.records.push_back(rec);
    }
    if (diverged) {
      traj.status = TrajectoryStatus::Diverged;
      break;
    }
  }

  traj.steps_completed = state.n;
  traj.final_x = state.x;
  traj.final_sigma = state.sigma;
  traj.final_error = distance(state.x, x_star);
  if (std::isnan(traj.final_error)) traj.final_error = std::numeric_limits<double>::infinity();
  traj.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return traj;
}

TrajectorySummary summarize(const Trajectory& traj, std::uint64_t trajectory_index,
                            const CompactFamily& compacts, const TrajectoryOptions& options) {
  TrajectorySummary row;
  row.trajectory_index = trajectory_index;
  row.algorithm = traj.algorithm;
  row.seed = traj.seed;
  row.status = traj.status;
  row.steps = traj.steps_completed;
  row.final_error = traj.final_error;
  row.final_sigma = traj.final_sigma;
  const auto stab = stabilization_report(traj.truncation_steps, options.n_steps,
                                         options.stabilization_fraction);
  row.last_truncation_step = stab.last_truncation_step;
  row.stabilized = traj.status == TrajectoryStatus::Completed && stab.stabilized;
  row.bounded = traj.algorithm == Algorithm::Chen
                    ? traj.max_distance <= compacts.radius(traj.final_sigma)
                    : traj.status == TrajectoryStatus::Completed;
  for (const auto& m : traj.monitors) {
    row.sup_martingale.push_back(m.running_sup());
    row.tail_oscillation.push_back(m.tail_oscillation());
  }
  row.wall_time_ms = traj.wall_time_ms;
  return row;
}

}  // namespace rtsa
