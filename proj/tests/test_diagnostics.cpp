#include <doctest.h>

#include <cmath>

#include "rtsa/diagnostics.hpp"
#include "rtsa/ensemble.hpp"
#include "rtsa/trajectory.hpp"

using namespace rtsa;

namespace {

NoiseModel additive(double s) { return {NoiseModel::Kind::AdditiveGaussian, s}; }

TrajectorySummary row(std::uint64_t sigma, double err, TrajectoryStatus st = TrajectoryStatus::Completed) {
  TrajectorySummary r;
  r.final_sigma = sigma;
  r.final_error = err;
  r.status = st;
  return r;
}

}  // namespace

TEST_CASE("monitor ignores steps that start outside the q-ball") {
  MartingaleMonitor m(1.0, 1, 0);
  StepRecord rec(1);
  rec.step = 1;
  rec.gamma = 0.5;
  rec.delta_m = {3.0};
  m.update(rec, Point{2.0}, Point{0.0});
  CHECK(m.partial_sum() == Point{0.0});
  CHECK(m.steps_inside() == 0);
  rec.step = 2;
  m.update(rec, Point{1.0}, Point{0.0});  // boundary counts as inside
  CHECK(m.partial_sum() == Point{1.5});
  CHECK(m.running_sup() == 1.5);
}

TEST_CASE("monitor is identically zero without noise") {
  const auto p = make_cubic(2, {0.0, 0.0}, additive(0.0));
  const auto g = GainSchedule::power_law(1, 0, 1);
  const CompactFamily k({0.0, 0.0}, 2.0, Growth::Geometric, 2.0);
  TrajectoryOptions o;
  o.n_steps = 5000;
  o.x0 = {0.5, 0.5};
  o.monitor_radii = {0.1, 1.0, 10.0};
  const auto t = run_trajectory(p, Algorithm::Chen, g, k, o, 1);
  for (const auto& m : t.monitors) {
    CHECK(m.partial_sum() == Point{0.0, 0.0});
    CHECK(m.running_sup() == 0.0);
    CHECK(m.tail_oscillation() == 0.0);
  }
}

TEST_CASE("monitor matches a brute-force recomputation from the step records") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto p = make_cubic(2, {0.2, -0.1}, {NoiseModel::Kind::StateScaledGaussian, 1.0});
    const auto g = GainSchedule::power_law(1, 1, 0.7);
    const CompactFamily k({0.0, 0.0}, 1.0, Growth::Geometric, 2.0);
    TrajectoryOptions o;
    o.n_steps = 1000;
    o.x0 = {0.5, 0.0};
    o.record = RecordPolicy::full();
    o.monitor_radii = {0.3, 1.0};
    const auto t = run_trajectory(p, Algorithm::Chen, g, k, o, seed);
    REQUIRE(t.records.size() == 1000);
    for (const auto& m : t.monitors) {
      Point sum{0.0, 0.0}, anchor{0.0, 0.0};
      double sup = 0.0, osc = 0.0, prev_sup = 0.0;
      for (std::size_t i = 0; i < t.records.size(); ++i) {
        const auto& r = t.records[i];
        if (distance(t.trace[i].x, p.root()) <= m.q())
          for (std::size_t c = 0; c < 2; ++c) sum[c] += r.gamma * r.delta_m[c];
        sup = std::max(sup, norm(sum));
        REQUIRE(sup >= prev_sup);
        prev_sup = sup;
        if (r.step == m.window_start()) anchor = sum;
        if (r.step >= m.window_start()) osc = std::max(osc, distance(sum, anchor));
      }
      CHECK(m.partial_sum() == sum);
      CHECK(m.running_sup() == sup);
      CHECK(m.tail_oscillation() == osc);
      CHECK(m.tail_oscillation() <= 2.0 * m.running_sup());
    }
  }
}

TEST_CASE("predicted bracket bound") {
  CHECK(predicted_bracket_bound(GainSchedule::power_law(1, 0, 1), 1.0, 10000) <= 1e-4);
  CHECK(predicted_bracket_bound(GainSchedule::power_law(1, 0, 1), 0.0, 10) == 0.0);

  const auto s = GainSchedule::power_law(1, 0, 0.75);
  const double bound = predicted_bracket_bound(s, 65.0, 10000);
  CHECK(bound == doctest::Approx(1.3).epsilon(1e-12));
  // Oracle: direct summation of 65 n^-1.5 up to 1e8 plus the exact integral
  // of the remainder, 65 * 2 / sqrt(1e8).
  double direct = 0.0;
  for (std::uint64_t n = 100'000'000; n > 10'000; --n) {
    const double x = static_cast<double>(n);
    direct += 1.0 / (x * std::sqrt(x));
  }
  direct = 65.0 * direct;
  CHECK(direct <= bound);
  CHECK(direct + 65.0 * 2.0 / 1e4 >= 0.99 * bound);

  double prev = std::numeric_limits<double>::infinity();
  for (std::uint64_t from : {1ULL, 10ULL, 100ULL, 10'000ULL, 1'000'000ULL, 1'000'000'000ULL}) {
    const double b = predicted_bracket_bound(s, 65.0, from);
    CHECK(b < prev);
    prev = b;
  }
  CHECK(prev < 1e-2);
}

TEST_CASE("stabilization report") {
  const auto none = stabilization_report({}, 100000);
  CHECK(none.final_sigma == 0);
  CHECK_FALSE(none.last_truncation_step.has_value());
  CHECK(none.stabilized);

  const auto early = stabilization_report({3}, 100000);
  CHECK(early.final_sigma == 1);
  CHECK(early.last_truncation_step == 3u);
  CHECK(early.stabilized);

  CHECK_FALSE(stabilization_report({95000}, 100000).stabilized);
  CHECK(stabilization_report({10000}, 100000).stabilized);
}

TEST_CASE("convergence report") {
  const auto p = make_linear(1, {1.0}, {0.0}, additive(0.0));
  const auto g = GainSchedule::power_law(1, 0, 1);
  const CompactFamily k({0.0}, 3.0, Growth::Geometric, 2.0);
  TrajectoryOptions o;
  o.n_steps = 100;
  o.x0 = {1.0};
  o.record = RecordPolicy::full();
  const auto t = run_trajectory(p, Algorithm::Chen, g, k, o, 1);
  const auto r = convergence_report(true, t.final_error, t.trace, {1e-3, 0.5});
  CHECK(r.final_error == 0.0);
  CHECK(r.first_hit_times[0] == 1u);
  CHECK(r.converged_flags[0]);

  const auto cubic = make_cubic(1, {0.0}, additive(0.0));
  o.x0 = {3.0};
  const auto rm = run_trajectory(cubic, Algorithm::RobbinsMonro, g, k, o, 1);
  REQUIRE(rm.status == TrajectoryStatus::Diverged);
  const auto rr = convergence_report(false, rm.final_error, rm.trace, {0.05, 1e9});
  CHECK(rr.converged_flags == std::vector<bool>{false, false});
}

TEST_CASE("aggregate examples") {
  AggregateOptions opts;
  opts.tolerances = {0.05};
  const auto one = aggregate({row(0, 0.01)}, opts);
  CHECK(one.converged[0].fraction == 1.0);

  const auto two = aggregate({row(0, 0.01), row(3, 0.2)}, opts);
  CHECK(two.max_sigma == 3);
  CHECK(two.sigma_histogram == std::map<std::uint64_t, std::uint64_t>{{0, 1}, {3, 1}});
  CHECK(two.converged[0].fraction == 0.5);

  const auto mixed = aggregate({row(0, 0.01), row(0, 0.01, TrajectoryStatus::Diverged),
                                row(1, 0.02, TrajectoryStatus::Aborted), row(2, 0.3)},
                               opts);
  CHECK(mixed.n_diverged == 1);
  CHECK(mixed.n_aborted == 1);
  CHECK(mixed.converged[0].count == 1);
  std::uint64_t total = 0;
  for (const auto& [s, c] : mixed.sigma_histogram) total += c;
  CHECK(total == mixed.n_trajectories);
  CHECK_THROWS_AS(aggregate({}, opts), std::invalid_argument);
}

TEST_CASE("Wilson interval matches reference values") {
  // Reference: statsmodels proportion_confint(method="wilson").
  auto w = wilson_interval(990, 1000);
  CHECK(w.lo == doctest::Approx(0.9816905311296853).epsilon(1e-12));
  CHECK(w.hi == doctest::Approx(0.9945592455544707).epsilon(1e-12));
  w = wilson_interval(0, 10);
  CHECK(w.lo == 0.0);
  CHECK(w.hi == doctest::Approx(0.27753279986288926).epsilon(1e-12));
  w = wilson_interval(37, 50);
  CHECK(w.lo == doctest::Approx(0.6044684273515116).epsilon(1e-12));
  CHECK(w.hi == doctest::Approx(0.841284725064476).epsilon(1e-12));
}

TEST_CASE("quantile follows numpy's default") {
  const std::vector<double> v{3, 1, 4, 1, 5, 9, 2, 6};
  CHECK(quantile(v, 0.5) == doctest::Approx(3.5));
  CHECK(quantile(v, 0.95) == doctest::Approx(7.95));
  CHECK(quantile(v, 0.3) == doctest::Approx(2.1));
}

TEST_CASE("localized martingale tail oscillation on the noisy cubic (500 seeds)") {
  EnsembleSpec spec{make_cubic(1, {0.0}, additive(1.0)), GainSchedule::power_law(1, 0, 1),
                    CompactFamily({0.0}, 2.0, Growth::Geometric, 2.0), TrajectoryOptions{},
                    AlgorithmChoice::Chen, 500, 2718, false};
  spec.options.n_steps = 100000;
  spec.options.x0 = {0.5};
  spec.options.monitor_radii = {2.0};
  REQUIRE(spec.options.window_start() == 90000);
  const auto result = run_ensemble(spec, 0);
  std::size_t within = 0;
  for (const auto& r : result.rows) within += r.tail_oscillation[0] <= 0.1;
  CHECK(double(within) / 500.0 >= 0.95);
}
