#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "neckflow/io.hpp"

namespace neckflow {

/// Exit-code contract shared by the CLI:
///   0 clean, 2 monitor violations, 3 numerical failure, 4 I/O failure,
///   5 missing manifest (analyze/report on an incomplete run).
inline constexpr int kExitOk = 0;
inline constexpr int kExitMonitorViolation = 2;
inline constexpr int kExitNumericalFailure = 3;
inline constexpr int kExitIoFailure = 4;
inline constexpr int kExitNoManifest = 5;

/// Resolves the output directory against NECKFLOW_OUT_ROOT for relative dirs.
std::filesystem::path resolve_output_dir(const std::string& dir);

int cmd_run(const RunConfig& config);

/// Recomputes monitors and the singularity analysis from the serialized
/// snapshots of a completed run; writes results under <dir>/analysis/.
int cmd_analyze(const std::filesystem::path& run_dir);

/// Plot-ready CSVs plus a plain-text digest for a completed run.
int cmd_report(const std::filesystem::path& run_dir);

struct SweepAxis {
    std::string key;  ///< section.key
    std::vector<std::string> values;
};

/// Cartesian product of the axes; children run concurrently in isolated
/// subdirectories. Sweep exit is the maximum child exit code.
int cmd_sweep(const RunConfig& base, const std::vector<SweepAxis>& axes);

}  // namespace neckflow
