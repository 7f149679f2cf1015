#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rtsa/ensemble.hpp"
#include "rtsa/io.hpp"

using namespace rtsa;
namespace fs = std::filesystem;

namespace {

EnsembleSpec cubic_spec(double sigma, Point x0, AlgorithmChoice algo, std::uint64_t n_traj, std::uint64_t n_steps) {
  ExperimentConfig cfg = parse_config("problem = cubic\n");
  cfg.noise.sigma = sigma;
  cfg.x0 = std::move(x0);
  cfg.algorithm = algo;
  cfg.n_trajectories = n_traj;
  cfg.n_steps = n_steps;
  cfg.compacts_r0 = 7.0;
  finalize_config(cfg, {"compacts.r0"});
  return EnsembleSpec::from_config(cfg);
}

bool same_rows(const std::vector<TrajectorySummary>& a, const std::vector<TrajectorySummary>& b) {
  std::ostringstream sa, sb;
  write_summary_csv(sa, a);
  write_summary_csv(sb, b);
  return sa.str() == sb.str();
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("rtsa_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("parallel ensemble reproduces the serial reference") {
  const auto spec = cubic_spec(1.0, {0.5}, AlgorithmChoice::BothPaired, 37, 2000);
  const auto ref = run_ensemble_serial(spec);
  REQUIRE(ref.rows.size() == 74);
  for (int workers : {1, 2, 8}) {
    const auto par = run_ensemble(spec, workers);
    CHECK(same_rows(ref.rows, par.rows));
    CHECK(ref.seeds == par.seeds);
  }
}

TEST_CASE("seeds derive from the master seed and the index only") {
  const auto spec = cubic_spec(1.0, {0.5}, AlgorithmChoice::Chen, 5, 10);
  const auto r = run_ensemble_serial(spec);
  for (std::size_t i = 0; i < 5; ++i) CHECK(r.seeds[i] == derive_seed(spec.master_seed, i));
}

TEST_CASE("paired zero-noise run from X_0 = 3") {
  const auto spec = cubic_spec(0.0, {3.0}, AlgorithmChoice::BothPaired, 1, 1000);
  const auto r = run_ensemble(spec, 2);
  REQUIRE(r.rows.size() == 2);
  CHECK(r.rows[0].algorithm == Algorithm::Chen);
  CHECK(r.rows[0].status == TrajectoryStatus::Completed);
  CHECK(r.rows[1].algorithm == Algorithm::RobbinsMonro);
  CHECK(r.rows[1].status == TrajectoryStatus::Diverged);
  const auto reports = build_reports(r, spec, {0.05}, 3.0);
  REQUIRE(reports.size() == 2);
  CHECK(reports[0].rm_divergence_fraction == 1.0);
}

TEST_CASE("single noiseless linear trajectory converges") {
  ExperimentConfig cfg = parse_config("problem = linear\ndim = 2\nnoise.sigma = 0\nn_steps = 200\n");
  const auto spec = EnsembleSpec::from_config(cfg);
  const auto r = run_ensemble(spec, 1);
  const auto reports = build_reports(r, spec, {0.05}, 3.0);
  CHECK(reports[0].at_tolerance(0.05)->fraction == 1.0);
  CHECK(reports[0].max_sigma == 0);
}

TEST_CASE("tail tolerances grow with q and shrink with the window start") {
  auto spec = cubic_spec(1.0, {0.5}, AlgorithmChoice::Chen, 1, 100000);
  spec.options.monitor_radii = {2.0, 4.0, 8.0};
  const auto t = tail_tolerances(spec, 3.0);
  REQUIRE(t.size() == 3);
  CHECK(t[0] < t[1]);
  CHECK(t[1] < t[2]);
  // Additive cubic: E|U|^2 <= q^6 + sigma^2 d on B(x*, q).
  const double expect = 3.0 * std::sqrt(predicted_bracket_bound(spec.schedule, 64.0 + 1.0, 90000));
  CHECK(t[0] == doctest::Approx(expect));
  spec.options.n_steps = 1000000;
  CHECK(tail_tolerances(spec, 3.0)[0] < t[0]);
}

TEST_CASE("summary CSV round trip and schema check") {
  const auto dir = scratch("csv");
  const auto spec = cubic_spec(1.0, {0.5}, AlgorithmChoice::BothPaired, 6, 500);
  const auto r = run_ensemble(spec, 2);
  const auto path = (dir / "summary.csv").string();
  write_summary_csv(path, r.rows);
  const auto back = read_summary_csv(path);
  CHECK(same_rows(r.rows, back));

  {
    std::ofstream f(dir / "bad.csv");
    f << "#schema=rtsa.summary.v0\n";
  }
  CHECK_THROWS_AS(read_summary_csv((dir / "bad.csv").string()), std::runtime_error);
  fs::remove_all(dir);
}

TEST_CASE("output files are identical across worker counts") {
  const auto base = scratch("outputs");
  ExperimentConfig cfg = parse_config("problem = cubic\nn_trajectories = 20\nn_steps = 3000\nrecord = thinned\n");
  const auto spec = EnsembleSpec::from_config(cfg);
  std::string first;
  for (int workers : {1, 4}) {
    auto s = spec;
    s.keep_trajectories = true;
    const auto r = run_ensemble(s, workers);
    const auto reports = build_reports(r, s, cfg.tolerances, cfg.tail_multiplier);
    const auto dir = base / std::to_string(workers);
    const auto art = write_outputs(dir.string(), cfg, r, reports, workers, utc_timestamp());
    CHECK(fs::exists(dir / "summary.csv"));
    CHECK(fs::exists(dir / "manifest.json"));
    CHECK(fs::exists(dir / "ensemble.json"));
    CHECK(fs::exists(dir / "traces" / "traj_0.csv"));
    CHECK(std::find(art.files.begin(), art.files.end(), "summary.csv") != art.files.end());
    std::ifstream f(dir / "summary.csv");
    std::stringstream ss;
    ss << f.rdbuf();
    if (first.empty()) first = ss.str();
    else CHECK(first == ss.str());
  }
  fs::remove_all(base);
}
