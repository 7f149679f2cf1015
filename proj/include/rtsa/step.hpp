// Single steps of the truncated (Chen) and plain Robbins–Monro recursions.
//
// Both steps draw the same number of normals per call, so a Chen run and an
// RM run started from the same seed see the same noise realisation.
#pragma once

#include <algorithm>
#include <cstdint>
#include <string_view>
#include <vector>

#include "rtsa/problems.hpp"
#include "rtsa/rng.hpp"
#include "rtsa/schedules.hpp"
#include "rtsa/vec.hpp"

namespace rtsa {

enum class Algorithm { Chen, RobbinsMonro };

std::string_view to_string(Algorithm a);

/// Where a truncated step sends the iterate.
///
/// InitialPoint is the classic rule (back to X_0). LastValid is an extension:
/// the current iterate radially projected into K_0.
enum class ResetPolicy { InitialPoint, LastValid };

std::string_view to_string(ResetPolicy r);

struct ChenState {
  Point x;                 // X_n
  std::uint64_t sigma = 0; // truncations so far
  std::uint64_t n = 0;     // completed steps
  Point x_reset;           // X_0

  static ChenState start(Point x0) {
    ChenState s;
    s.x = x0;
    s.x_reset = std::move(x0);
    return s;
  }
};

/// Full decomposition of step n -> n+1:
///   X_{n+1} = X_n - gamma u(X_n) - gamma dM_{n+1} + gamma p_{n+1}
/// with p = 0 on accepted steps and
///   p = u(X_n) + dM_{n+1} + (X_reset - X_n) / gamma
/// on truncated ones.
struct StepRecord {
  std::uint64_t step = 0;  // n + 1
  double gamma = 0.0;      // gamma_{n+1}
  Point noise_draw;        // standard normals consumed by the oracle
  Point oracle;            // U(X_n, Z_{n+1})
  Point drift;             // u(X_n)
  Point delta_m;           // U - u
  Point x_half;            // X_n - gamma U
  Point p;
  bool truncated = false;

  explicit StepRecord(std::size_t dim = 0)
      : noise_draw(dim), oracle(dim), drift(dim), delta_m(dim), x_half(dim), p(dim) {}
};

enum class StepOutcome { Accepted, Truncated, NonfiniteOracle, Diverged };

namespace detail {

template <NormalSource S>
void draw_and_split(const StochasticProblem& problem, ConstVec x, StepRecord& rec, S& source) {
  problem.sample_oracle(x, source, rec.noise_draw, rec.oracle);
  problem.mean_field(x, rec.drift);
  for (std::size_t i = 0; i < x.size(); ++i) rec.delta_m[i] = rec.oracle[i] - rec.drift[i];
}

}  // namespace detail

/// One step of the randomly truncated recursion. On NonfiniteOracle the
/// state is left untouched.
template <NormalSource S>
StepOutcome step_chen(const StochasticProblem& problem, const GainSchedule& schedule,
                      const CompactFamily& compacts, ResetPolicy reset, ChenState& state,
                      StepRecord& rec, S& source) {
  const std::size_t d = state.x.size();
  rec.step = state.n + 1;
  rec.gamma = schedule.gain(rec.step);
  detail::draw_and_split(problem, state.x, rec, source);
  if (!all_finite(rec.oracle)) return StepOutcome::NonfiniteOracle;
  for (std::size_t i = 0; i < d; ++i) rec.x_half[i] = state.x[i] - rec.gamma * rec.oracle[i];
  if (!all_finite(rec.x_half)) return StepOutcome::NonfiniteOracle;

  ++state.n;
  if (compacts.contains(state.sigma, rec.x_half)) {
    rec.truncated = false;
    std::fill(rec.p.begin(), rec.p.end(), 0.0);
    state.x = rec.x_half;
    return StepOutcome::Accepted;
  }

  rec.truncated = true;
  const Point target =
      reset == ResetPolicy::InitialPoint ? state.x_reset : compacts.project_to_first(state.x);
  for (std::size_t i = 0; i < d; ++i)
    rec.p[i] = rec.drift[i] + rec.delta_m[i] + (target[i] - state.x[i]) / rec.gamma;
  state.x = target;
  ++state.sigma;
  return StepOutcome::Truncated;
}

/// One plain Robbins–Monro step. Diverged when the new iterate is
/// non-finite or its norm exceeds `divergence_threshold`.
template <NormalSource S>
StepOutcome step_rm(const StochasticProblem& problem, const GainSchedule& schedule,
                    double divergence_threshold, ChenState& state, StepRecord& rec, S& source) {
  const std::size_t d = state.x.size();
  rec.step = state.n + 1;
  rec.gamma = schedule.gain(rec.step);
  detail::draw_and_split(problem, state.x, rec, source);
  for (std::size_t i = 0; i < d; ++i) rec.x_half[i] = state.x[i] - rec.gamma * rec.oracle[i];
  rec.truncated = false;
  std::fill(rec.p.begin(), rec.p.end(), 0.0);
  state.x = rec.x_half;
  ++state.n;
  if (!all_finite(state.x) || norm(state.x) > divergence_threshold) return StepOutcome::Diverged;
  return StepOutcome::Accepted;
}

/// Replays given normals; for tests and worked examples.
class FixedNormals {
 public:
  explicit FixedNormals(std::vector<double> values) : values_(std::move(values)) {}
  void fill_standard_normals(std::span<double> out) {
    for (double& v : out) v = values_.empty() ? 0.0 : values_[pos_++ % values_.size()];
  }

 private:
  std::vector<double> values_;
  std::size_t pos_ = 0;
};

}  // namespace rtsa
