#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "neckflow/config.hpp"
#include "neckflow/monitors.hpp"

namespace neckflow {

/// Shortest round-trip decimal form; '.' decimal separator, locale-free.
std::string format_scalar(Scalar x);
Scalar parse_scalar(const std::string& s);

std::uint64_t fnv1a64(const std::string& bytes);
std::string fnv1a64_hex(const std::string& bytes);

/// Writes bytes atomically enough for our purposes (create directories,
/// fail loudly). Throws IoError.
void write_file(const std::filesystem::path& path, const std::string& bytes);
std::string read_file(const std::filesystem::path& path);

std::string snapshot_csv(const FlowState& state, const GeometrySample& sample);
FlowState snapshot_from_csv(const std::string& bytes, Scalar t);

std::string summary_csv(const Trajectory& traj);
std::string events_csv(const std::vector<TrajectoryEvent>& events);
std::string monitor_csv(const MonitorSeries& series);
std::string rescaled_csv(const FlowState& rescaled);

/// snapshots/snap_NNNNN.csv + snapshots/index.csv + events.csv + summary.csv.
void save_trajectory(const std::filesystem::path& dir, const Trajectory& traj);
/// Rebuilds the trajectory (geometry recomputed from the stored profiles).
Trajectory load_trajectory(const std::filesystem::path& dir, const StepControls& controls);

std::string singularity_json(const SingularityReport& report);
std::string monitor_verdict_json(const MonitorSuite& suite);

struct ManifestInfo {
    std::string started_utc;
    std::string finished_utc;
    int exit_status = 0;
};

/// Written last; its presence marks a complete run.
void write_manifest(const std::filesystem::path& dir, const RunConfig& config,
                    const Trajectory& traj, const ManifestInfo& info);

}  // namespace neckflow
