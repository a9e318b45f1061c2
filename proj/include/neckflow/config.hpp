#pragma once

#include <cstdint>
#include <string>

#include "neckflow/monitors.hpp"
#include "neckflow/preset.hpp"

namespace neckflow {

/// Fully validated run configuration. Parsed from the line-based
///   [section]
///   key = value   # comment
/// format; unknown keys are rejected with their line number, "auto" selects
/// the documented default for the keys that support it.
struct RunConfig {
    // [grid]
    Scalar grid_a = 0;
    Scalar grid_b = 1;
    Index grid_n = 401;

    // [preset]
    PresetSpec preset;
    std::string preset_file;  ///< table presets: CSV path

    // [controls]
    StepControls controls;

    // [monitors]
    bool monitors_enabled = true;
    MonitorSettings monitors;

    // [analysis]
    bool analysis_enabled = true;
    AnalysisSettings analysis;

    // [output]
    std::string output_dir = "out";
    std::uint64_t seed = 0;

    ProfileGrid make_grid() const;
    FlowState initial_state() const;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Normalized echo of every key (deterministic ordering, shortest
/// round-trip numbers). parse_config(echo_config(c)) reproduces c.
std::string echo_config(const RunConfig& config);

/// Applies "section.key=value" overrides (used by sweep axes).
void apply_override(RunConfig& config, const std::string& key, const std::string& value);

}  // namespace neckflow
