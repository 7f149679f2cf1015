#include "rtsa/io.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rtsa {

namespace fs = std::filesystem;

namespace {

constexpr const char* kSummaryHeader =
    "trajectory_index,algorithm,seed,status,steps,final_error,final_sigma,last_truncation_step,"
    "stabilized,bounded,sup_martingale,tail_oscillation";

std::string num(double v) { return fmt::format("{:.17g}", v); }

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  return f;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "nan" || s.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::stod(s);
}

}  // namespace

void write_summary_csv(std::ostream& os, const std::vector<TrajectorySummary>& rows) {
  os << kSummarySchema << '\n' << kSummaryHeader << '\n';
  for (const auto& r : rows) {
    const std::string last = r.last_truncation_step ? std::to_string(*r.last_truncation_step) : "";
    const std::string sup = r.sup_martingale.empty() ? "" : num(r.sup_martingale.front());
    const std::string tail = r.tail_oscillation.empty() ? "" : num(r.tail_oscillation.front());
    fmt::print(os, "{},{},{},{},{},{},{},{},{},{},{},{}\n", r.trajectory_index, to_string(r.algorithm),
               r.seed, to_string(r.status), r.steps, num(r.final_error), r.final_sigma, last,
               r.stabilized ? 1 : 0, r.bounded ? 1 : 0, sup, tail);
  }
}

void write_summary_csv(const std::string& path, const std::vector<TrajectorySummary>& rows) {
  auto f = open_out(path);
  write_summary_csv(f, rows);
}

std::vector<TrajectorySummary> read_summary_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read '" + path + "'");
  std::string line;
  if (!std::getline(f, line) || line != kSummarySchema)
    throw std::runtime_error(fmt::format("'{}': unknown summary schema (expected '{}')", path, kSummarySchema));
  if (!std::getline(f, line) || line != kSummaryHeader)
    throw std::runtime_error(fmt::format("'{}': unexpected column header", path));
  std::vector<TrajectorySummary> rows;
  std::size_t lineno = 2;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto c = split_csv(line);
    auto bad = [&](const std::string& why) {
      return std::runtime_error(fmt::format("'{}':{}: {}", path, lineno, why));
    };
    if (c.size() != 12) throw bad(fmt::format("expected 12 columns, got {}", c.size()));
    TrajectorySummary r;
    try {
      r.trajectory_index = std::stoull(c[0]);
      if (c[1] == "chen") r.algorithm = Algorithm::Chen;
      else if (c[1] == "rm") r.algorithm = Algorithm::RobbinsMonro;
      else throw bad("unknown algorithm '" + c[1] + "'");
      r.seed = std::stoull(c[2]);
      const auto status = parse_status(c[3]);
      if (!status) throw bad("unknown status '" + c[3] + "'");
      r.status = *status;
      r.steps = std::stoull(c[4]);
      r.final_error = parse_double(c[5]);
      r.final_sigma = std::stoull(c[6]);
      if (!c[7].empty()) r.last_truncation_step = std::stoull(c[7]);
      r.stabilized = c[8] == "1";
      r.bounded = c[9] == "1";
      if (!c[10].empty()) r.sup_martingale.push_back(parse_double(c[10]));
      if (!c[11].empty()) r.tail_oscillation.push_back(parse_double(c[11]));
    } catch (const std::logic_error& e) {
      throw bad(std::string("malformed number: ") + e.what());
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_trace_csv(const std::string& path, const Trajectory& traj) {
  auto f = open_out(path);
  const std::size_t d = traj.final_x.size();
  f << "step";
  for (std::size_t i = 0; i < d; ++i) f << ",x" << i + 1;
  f << ",error,sigma,truncated\n";
  for (const auto& p : traj.trace) {
    f << p.step;
    for (double v : p.x) f << ',' << num(v);
    fmt::print(f, ",{},{},{}\n", num(p.error), p.sigma, p.truncated ? 1 : 0);
  }
}

void write_timings_csv(const std::string& path, const std::vector<TrajectorySummary>& rows) {
  auto f = open_out(path);
  f << "trajectory_index,algorithm,wall_time_ms\n";
  for (const auto& r : rows)
    fmt::print(f, "{},{},{:.3f}\n", r.trajectory_index, to_string(r.algorithm), r.wall_time_ms);
}

nlohmann::json to_json(const EnsembleReport& r) {
  nlohmann::json j;
  j["algorithm"] = to_string(r.algorithm);
  j["n_trajectories"] = r.n_trajectories;
  j["n_completed"] = r.n_completed;
  j["n_diverged"] = r.n_diverged;
  j["n_aborted"] = r.n_aborted;
  j["median_final_error"] = std::isfinite(r.median_final_error) ? nlohmann::json(r.median_final_error)
                                                                 : nlohmann::json(nullptr);
  auto& conv = j["frac_converged"] = nlohmann::json::array();
  for (const auto& c : r.converged)
    conv.push_back({{"tolerance", c.tolerance},
                    {"count", c.count},
                    {"fraction", c.fraction},
                    {"wilson95", {c.wilson95.lo, c.wilson95.hi}}});
  auto& hist = j["sigma_histogram"] = nlohmann::json::object();
  for (const auto& [sigma, count] : r.sigma_histogram) hist[std::to_string(sigma)] = count;
  j["max_sigma"] = r.max_sigma;
  j["frac_stabilized"] = r.frac_stabilized;
  j["frac_bounded"] = r.frac_bounded;
  auto& mart = j["martingale_tail"] = nlohmann::json::array();
  for (const auto& m : r.martingale) {
    nlohmann::json e{{"q", m.q},
                     {"sup_p50", m.sup_p50},
                     {"tail_p50", m.tail_p50},
                     {"tail_p95", m.tail_p95},
                     {"tail_max", m.tail_max}};
    if (m.tail_tolerance) e["tail_tolerance"] = *m.tail_tolerance;
    if (m.frac_within_tolerance) e["frac_within_tolerance"] = *m.frac_within_tolerance;
    mart.push_back(e);
  }
  if (r.rm_divergence_fraction) j["rm_divergence_fraction"] = *r.rm_divergence_fraction;
  return j;
}

void print_report(std::ostream& os, const EnsembleReport& r) {
  fmt::print(os, "algorithm            {}\n", to_string(r.algorithm));
  fmt::print(os, "trajectories         {} (completed {}, diverged {}, aborted {})\n", r.n_trajectories,
             r.n_completed, r.n_diverged, r.n_aborted);
  fmt::print(os, "median final error   {:.6g}\n", r.median_final_error);
  for (const auto& c : r.converged)
    fmt::print(os, "converged(tol={:g})  {:.4f}  [{:.4f}, {:.4f}] 95% Wilson\n", c.tolerance,
               c.fraction, c.wilson95.lo, c.wilson95.hi);
  fmt::print(os, "stabilized           {:.4f}\n", r.frac_stabilized);
  fmt::print(os, "bounded              {:.4f}\n", r.frac_bounded);
  fmt::print(os, "max sigma            {}\n", r.max_sigma);
  fmt::print(os, "sigma histogram     ");
  for (const auto& [sigma, count] : r.sigma_histogram) fmt::print(os, " {}:{}", sigma, count);
  fmt::print(os, "\n");
  if (!r.martingale.empty()) {
    fmt::print(os, "{:>10} {:>12} {:>12} {:>12} {:>12} {:>12}\n", "q", "sup p50", "tail p50",
               "tail p95", "tolerance", "within");
    for (const auto& m : r.martingale)
      fmt::print(os, "{:>10.4g} {:>12.4e} {:>12.4e} {:>12.4e} {:>12} {:>12}\n", m.q, m.sup_p50,
                 m.tail_p50, m.tail_p95,
                 m.tail_tolerance ? fmt::format("{:.4e}", *m.tail_tolerance) : "-",
                 m.frac_within_tolerance ? fmt::format("{:.4f}", *m.frac_within_tolerance) : "-");
  }
  if (r.rm_divergence_fraction)
    fmt::print(os, "rm divergence        {:.4f}\n", *r.rm_divergence_fraction);
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

RunArtifacts write_outputs(const std::string& out_dir, const ExperimentConfig& cfg,
                           const EnsembleResult& result, const std::vector<EnsembleReport>& reports,
                           int workers, const std::string& started_at) {
  fs::create_directories(out_dir);
  RunArtifacts art;
  const fs::path root(out_dir);

  write_summary_csv((root / "summary.csv").string(), result.rows);
  art.files.push_back("summary.csv");
  write_timings_csv((root / "timings.csv").string(), result.rows);
  art.files.push_back("timings.csv");

  if (cfg.record.kind != RecordPolicy::Kind::FinalOnly && !result.trajectories.empty()) {
    fs::create_directories(root / "traces");
    const bool paired = cfg.algorithm == AlgorithmChoice::BothPaired;
    for (std::size_t k = 0; k < result.trajectories.size(); ++k) {
      const auto& row = result.rows[k];
      const std::string name =
          paired ? fmt::format("traces/traj_{}_{}.csv", row.trajectory_index, to_string(row.algorithm))
                 : fmt::format("traces/traj_{}.csv", row.trajectory_index);
      write_trace_csv((root / name).string(), result.trajectories[k]);
      art.files.push_back(name);
    }
  }

  nlohmann::json summary;
  summary["config_hash"] = cfg.hash();
  summary["reports"] = nlohmann::json::array();
  for (const auto& r : reports) summary["reports"].push_back(to_json(r));
  {
    auto f = open_out((root / "ensemble.json").string());
    f << summary.dump(2) << '\n';
  }
  art.files.push_back("ensemble.json");

  nlohmann::json manifest;
  manifest["tool"] = "rtsa";
  manifest["tool_version"] = kToolVersion;
  manifest["config_hash"] = cfg.hash();
  manifest["config"] = cfg.canonical_text();
  manifest["applied_defaults"] = cfg.applied_defaults;
  manifest["warnings"] = cfg.warnings;
  manifest["workers"] = workers;
  manifest["started_at"] = started_at;
  manifest["finished_at"] = utc_timestamp();
  manifest["master_seed"] = cfg.master_seed;
  auto& seeds = manifest["trajectory_seeds"] = nlohmann::json::array();
  for (std::size_t i = 0; i < result.seeds.size(); ++i) seeds.push_back({{"index", i}, {"seed", result.seeds[i]}});
  art.files.push_back("manifest.json");
  manifest["outputs"] = art.files;
  {
    auto f = open_out((root / "manifest.json").string());
    f << manifest.dump(2) << '\n';
  }
  return art;
}

}  // namespace rtsa
