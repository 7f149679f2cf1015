#include "rtsa/ensemble.hpp"

#include <cmath>
#include <exception>

#ifdef RTSA_HAVE_OPENMP
#include <omp.h>
#endif

namespace rtsa {

EnsembleSpec EnsembleSpec::from_config(const ExperimentConfig& cfg) {
  return EnsembleSpec{cfg.make_problem(),   cfg.make_schedule(), cfg.make_compacts(),
                      cfg.trajectory_options(), cfg.algorithm,   cfg.n_trajectories,
                      cfg.master_seed,      false};
}

std::vector<Algorithm> EnsembleSpec::algorithms() const {
  switch (algorithm) {
    case AlgorithmChoice::Chen: return {Algorithm::Chen};
    case AlgorithmChoice::RobbinsMonro: return {Algorithm::RobbinsMonro};
    case AlgorithmChoice::BothPaired: return {Algorithm::Chen, Algorithm::RobbinsMonro};
  }
  return {};
}

namespace {

// Runs every algorithm of trajectory `index` into its slots. Never throws.
void run_slot(const EnsembleSpec& spec, const std::vector<Algorithm>& algos, std::uint64_t index,
              EnsembleResult& out) {
  const std::uint64_t seed = derive_seed(spec.master_seed, index);
  out.seeds[index] = seed;
  for (std::size_t a = 0; a < algos.size(); ++a) {
    const std::size_t slot = index * algos.size() + a;
    Trajectory traj;
    try {
      traj = run_trajectory(spec.problem, algos[a], spec.schedule, spec.compacts, spec.options, seed);
    } catch (const std::exception& e) {
      traj.algorithm = algos[a];
      traj.seed = seed;
      traj.status = TrajectoryStatus::Aborted;
      traj.abort_reason = e.what();
      traj.final_error = std::numeric_limits<double>::infinity();
    }
    out.rows[slot] = summarize(traj, index, spec.compacts, spec.options);
    if (spec.keep_trajectories) out.trajectories[slot] = std::move(traj);
  }
}

EnsembleResult allocate(const EnsembleSpec& spec, std::size_t n_algos) {
  EnsembleResult r;
  r.rows.resize(spec.n_trajectories * n_algos);
  r.seeds.resize(spec.n_trajectories);
  if (spec.keep_trajectories) r.trajectories.resize(spec.n_trajectories * n_algos);
  return r;
}

}  // namespace

EnsembleResult run_ensemble_serial(const EnsembleSpec& spec) {
  const auto algos = spec.algorithms();
  EnsembleResult result = allocate(spec, algos.size());
  for (std::uint64_t i = 0; i < spec.n_trajectories; ++i) run_slot(spec, algos, i, result);
  return result;
}

EnsembleResult run_ensemble(const EnsembleSpec& spec, int workers) {
#ifdef RTSA_HAVE_OPENMP
  const auto algos = spec.algorithms();
  EnsembleResult result = allocate(spec, algos.size());
  const int threads = workers > 0 ? workers : omp_get_max_threads();
  const auto n = static_cast<std::int64_t>(spec.n_trajectories);
#pragma omp parallel for schedule(dynamic, 4) num_threads(threads)
  for (std::int64_t i = 0; i < n; ++i) run_slot(spec, algos, static_cast<std::uint64_t>(i), result);
  return result;
#else
  (void)workers;
  return run_ensemble_serial(spec);
#endif
}

double second_moment_on_ball(const StochasticProblem& problem, double q, std::uint64_t seed) {
  if (auto b = problem.second_moment_bound(q)) return *b;
  NormalStream stream(seed);
  const H3Report h3 = check_h3(problem, q, 10000, stream);
  return h3.max_second_moment + 5.0 * h3.standard_error;
}

std::vector<double> tail_tolerances(const EnsembleSpec& spec, double multiplier) {
  std::vector<double> out;
  const std::uint64_t from_n = spec.options.window_start();
  for (double q : spec.options.monitor_radii) {
    const double m2 = second_moment_on_ball(spec.problem, q, spec.master_seed);
    out.push_back(multiplier * std::sqrt(predicted_bracket_bound(spec.schedule, m2, from_n)));
  }
  return out;
}

std::vector<EnsembleReport> build_reports(const EnsembleResult& result, const EnsembleSpec& spec,
                                          const std::vector<double>& tolerances,
                                          double tail_multiplier) {
  AggregateOptions opts;
  opts.tolerances = tolerances;
  opts.monitor_radii = spec.options.monitor_radii;
  opts.tail_tolerances = tail_tolerances(spec, tail_multiplier);

  std::vector<EnsembleReport> reports;
  for (Algorithm algo : spec.algorithms()) {
    std::vector<TrajectorySummary> rows;
    for (const auto& row : result.rows)
      if (row.algorithm == algo) rows.push_back(row);
    reports.push_back(aggregate(rows, opts));
  }
  if (reports.size() == 2) {
    const auto& rm = reports[1];
    reports[0].rm_divergence_fraction =
        static_cast<double>(rm.n_diverged) / static_cast<double>(rm.n_trajectories);
    reports[1].rm_divergence_fraction = reports[0].rm_divergence_fraction;
  }
  return reports;
}

}  // namespace rtsa
