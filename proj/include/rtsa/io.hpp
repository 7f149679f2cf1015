// Result files: summary/trace/timing CSVs, the ensemble summary document
// and the run manifest.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "rtsa/config.hpp"
#include "rtsa/diagnostics.hpp"
#include "rtsa/ensemble.hpp"

namespace rtsa {

inline constexpr const char* kToolVersion = "0.3.0";

/// First line of summary.csv. `report` refuses files with any other schema.
inline constexpr const char* kSummarySchema = "#schema=rtsa.summary.v1";

void write_summary_csv(std::ostream& os, const std::vector<TrajectorySummary>& rows);
void write_summary_csv(const std::string& path, const std::vector<TrajectorySummary>& rows);

/// Throws std::runtime_error on an unknown schema line or malformed row.
std::vector<TrajectorySummary> read_summary_csv(const std::string& path);

/// step, x_1..x_d, error, sigma, truncated
void write_trace_csv(const std::string& path, const Trajectory& traj);

void write_timings_csv(const std::string& path, const std::vector<TrajectorySummary>& rows);

nlohmann::json to_json(const EnsembleReport& report);

/// Human-readable table.
void print_report(std::ostream& os, const EnsembleReport& report);

struct RunArtifacts {
  std::vector<std::string> files;  // relative to the output directory
};

/// Writes summary.csv, timings.csv, ensemble.json, manifest.json and, when
/// trajectories were kept with a trace, traces/traj_{i}.csv.
RunArtifacts write_outputs(const std::string& out_dir, const ExperimentConfig& cfg,
                           const EnsembleResult& result, const std::vector<EnsembleReport>& reports,
                           int workers, const std::string& started_at);

std::string utc_timestamp();

}  // namespace rtsa
