#include "rtsa/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>

#include "rtsa/config.hpp"
#include "rtsa/ensemble.hpp"
#include "rtsa/io.hpp"

namespace rtsa {

namespace {

struct Options {
  std::string config_path;
  std::string out_dir;
  std::string in_dir;
  std::string summary_path;
  int workers = 0;
  std::optional<std::uint64_t> seed;
  std::vector<double> tolerances;
};

ExperimentConfig load_with_overrides(const Options& o) {
  ExperimentConfig cfg = load_config(o.config_path);
  if (o.seed) {
    cfg.master_seed = *o.seed;
    std::erase_if(cfg.applied_defaults, [](const std::string& s) { return s.rfind("master_seed", 0) == 0; });
  }
  return cfg;
}

struct Completed {
  ExperimentConfig cfg;
  EnsembleSpec spec;
  EnsembleResult result;
  std::vector<EnsembleReport> reports;
};

Completed execute(ExperimentConfig cfg, const Options& o, std::ostream& err) {
  for (const auto& w : cfg.warnings) fmt::print(err, "warning: {}\n", w);
  EnsembleSpec spec = EnsembleSpec::from_config(cfg);
  spec.keep_trajectories = cfg.record.kind != RecordPolicy::Kind::FinalOnly;
  EnsembleResult result = run_ensemble(spec, o.workers);
  auto reports = build_reports(result, spec, cfg.tolerances, cfg.tail_multiplier);
  return {std::move(cfg), std::move(spec), std::move(result), std::move(reports)};
}

int cmd_run(const Options& o, std::ostream& out, std::ostream& err) {
  const std::string started = utc_timestamp();
  auto done = execute(load_with_overrides(o), o, err);
  const std::string dir = o.out_dir.empty() ? done.cfg.output_dir : o.out_dir;
  const auto art = write_outputs(dir, done.cfg, done.result, done.reports, o.workers, started);
  for (const auto& r : done.reports) {
    print_report(out, r);
    out << '\n';
  }
  fmt::print(out, "wrote {} files to {}\n", art.files.size(), dir);
  return kExitOk;
}

int cmd_check(const Options& o, std::ostream& out, std::ostream& err) {
  const ExperimentConfig cfg = load_with_overrides(o);
  for (const auto& w : cfg.warnings) fmt::print(err, "warning: {}\n", w);
  const StochasticProblem problem = cfg.make_problem();
  const GainSchedule schedule = cfg.make_schedule();

  fmt::print(out, "problem {} (d={}), noise {} sigma={}\n", problem.name(), problem.dim(),
             to_string(problem.noise().kind), problem.noise().sigma);

  H1SamplerSpec h1spec;
  h1spec.radii = cfg.check_radii;
  h1spec.points_per_radius = cfg.check_points_per_radius;
  h1spec.seed = derive_seed(cfg.master_seed, 0x4831);
  const H1Report h1 = check_h1(problem, h1spec);
  fmt::print(out, "H1  {}  min (u(x) | x - x*) = {:.6g} over {} points\n", h1.passed() ? "pass" : "FAIL",
             h1.min_inner_product, h1.points_checked);
  const std::size_t shown = std::min<std::size_t>(h1.violations.size(), 10);
  for (std::size_t i = 0; i < shown; ++i)
    fmt::print(out, "    violation at x = ({}): {:.6g}\n", fmt::join(h1.violations[i].x, ", "),
               h1.violations[i].inner_product);
  if (h1.violations.size() > shown) fmt::print(out, "    ... {} more\n", h1.violations.size() - shown);

  const H2Report h2 = check_h2(schedule);
  fmt::print(out, "H2  {}  gains {}: sum diverges = {}, squares summable = {}\n",
             h2.holds() ? "pass" : "FAIL", schedule.describe(), h2.divergent_sum, h2.square_summable);

  NormalStream stream(derive_seed(cfg.master_seed, 0x4833));
  const H3Report h3 = check_h3(problem, cfg.check_h3_radius, cfg.check_h3_samples, stream);
  fmt::print(out, "H3  {}  max E|U|^2 = {:.6g} +- {:.3g} on B(x*, {:g}) over {} points", h3.passed() ? "pass" : "FAIL",
             h3.max_second_moment, h3.standard_error, h3.radius, h3.points_checked);
  if (h3.analytic_bound) fmt::print(out, " (analytic bound {:.6g})", *h3.analytic_bound);
  fmt::print(out, "\n");

  const bool ok = h1.passed() && h2.holds() && h3.passed();
  return ok ? kExitOk : kExitHypothesisViolation;
}

int cmd_report(const Options& o, std::ostream& out, std::ostream&) {
  namespace fs = std::filesystem;
  std::string summary = o.summary_path;
  if (summary.empty()) summary = (fs::path(o.in_dir.empty() ? "out" : o.in_dir) / "summary.csv").string();
  const auto rows = read_summary_csv(summary);
  if (rows.empty()) throw std::runtime_error("'" + summary + "' has no rows");

  AggregateOptions opts;
  opts.tolerances = o.tolerances.empty() ? std::vector<double>{0.05} : o.tolerances;
  // The summary only carries the primary q; take its value from ensemble.json when present.
  const fs::path ens = fs::path(summary).parent_path() / "ensemble.json";
  if (std::ifstream f(ens); f) {
    try {
      const auto j = nlohmann::json::parse(f);
      const auto& m = j.at("reports").at(0).at("martingale_tail").at(0);
      opts.monitor_radii = {m.at("q").get<double>()};
      if (m.contains("tail_tolerance")) opts.tail_tolerances = {m.at("tail_tolerance").get<double>()};
    } catch (const nlohmann::json::exception&) {
    }
  }

  std::map<Algorithm, std::vector<TrajectorySummary>> by_algo;
  for (const auto& r : rows) by_algo[r.algorithm].push_back(r);
  for (const auto& [algo, group] : by_algo) {
    print_report(out, aggregate(group, opts));
    out << '\n';
  }
  return kExitOk;
}

int cmd_compare(const Options& o, std::ostream& out, std::ostream& err) {
  const std::string started = utc_timestamp();
  ExperimentConfig cfg = load_with_overrides(o);
  cfg.algorithm = AlgorithmChoice::BothPaired;
  auto done = execute(std::move(cfg), o, err);
  const auto& chen = done.reports.at(0);
  const auto& rm = done.reports.at(1);

  std::uint64_t chen_only = 0, rm_only = 0;
  const double tol = done.cfg.tolerances.front();
  for (std::size_t i = 0; i + 1 < done.result.rows.size(); i += 2) {
    const auto& c = done.result.rows[i];
    const auto& r = done.result.rows[i + 1];
    const bool cc = c.status == TrajectoryStatus::Completed && c.final_error <= tol;
    const bool rc = r.status == TrajectoryStatus::Completed && r.final_error <= tol;
    chen_only += cc && !rc;
    rm_only += rc && !cc;
  }
  fmt::print(out, "{:<28} {:>12} {:>12}\n", "paired comparison", "chen", "rm");
  fmt::print(out, "{:<28} {:>12} {:>12}\n", "trajectories", chen.n_trajectories, rm.n_trajectories);
  fmt::print(out, "{:<28} {:>12} {:>12}\n", "completed", chen.n_completed, rm.n_completed);
  fmt::print(out, "{:<28} {:>12} {:>12}\n", "diverged", chen.n_diverged, rm.n_diverged);
  fmt::print(out, "{:<28} {:>12} {:>12}\n", "aborted", chen.n_aborted, rm.n_aborted);
  fmt::print(out, "{:<28} {:>12.4f} {:>12.4f}\n", fmt::format("converged(tol={:g})", tol),
             chen.converged.front().fraction, rm.converged.front().fraction);
  fmt::print(out, "{:<28} {:>12.6g} {:>12.6g}\n", "median final error", chen.median_final_error,
             rm.median_final_error);
  fmt::print(out, "{:<28} {:>12} {:>12}\n", "max sigma", chen.max_sigma, "-");
  fmt::print(out, "pairs converged only under chen: {}, only under rm: {}\n", chen_only, rm_only);

  if (!o.out_dir.empty()) {
    const auto art = write_outputs(o.out_dir, done.cfg, done.result, done.reports, o.workers, started);
    fmt::print(out, "wrote {} files to {}\n", art.files.size(), o.out_dir);
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Randomly truncated stochastic approximation experiments", "rtsa"};
  app.require_subcommand(1);
  Options o;

  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "Experiment config file")->required();
    sub->add_option("--seed", o.seed, "Override master_seed");
  };
  auto* run = app.add_subcommand("run", "Run an ensemble and write results");
  add_config(run);
  run->add_option("--out", o.out_dir, "Output directory (default: output.dir)");
  run->add_option("--workers", o.workers, "Worker threads; affects speed only");

  auto* check = app.add_subcommand("check", "Check the hypotheses for the configured problem");
  add_config(check);

  auto* report = app.add_subcommand("report", "Re-render statistics from a stored summary.csv");
  report->add_option("--in", o.in_dir, "Run output directory");
  report->add_option("--summary", o.summary_path, "Path to summary.csv");
  report->add_option("--tol", o.tolerances, "Convergence tolerances")->delimiter(',');

  auto* compare = app.add_subcommand("compare", "Paired Chen vs Robbins-Monro table");
  add_config(compare);
  compare->add_option("--out", o.out_dir, "Also write result files here");
  compare->add_option("--workers", o.workers, "Worker threads; affects speed only");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    fmt::print(err, "error: {}\n", e.what());
    err << app.help();
    return kExitValidation;
  }

  try {
    if (*run) return cmd_run(o, out, err);
    if (*check) return cmd_check(o, out, err);
    if (*report) return cmd_report(o, out, err);
    if (*compare) return cmd_compare(o, out, err);
  } catch (const ConfigError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitRuntime;
  }
  return kExitValidation;
}

}  // namespace rtsa
