#pragma once

#include <map>
#include <optional>
#include <string>

#include "neckflow/grid.hpp"

namespace neckflow {

enum class PresetKind { cylinder, cosine_neck, catenoid, table };

/// Named initial profiles.
///   cylinder:    rho = r
///   cosine_neck: rho = m + A cos(w pi (x - a)/(b - a)),  m > A > 0, integer w
///   catenoid:    rho = c cosh(x / c),                     c > 0
///   table:       explicit node values (one per grid node)
struct PresetSpec {
    PresetKind kind = PresetKind::cylinder;
    std::map<std::string, Scalar> params;
    std::optional<Array> table;
    std::optional<Array> table_x;  ///< axis coordinates accompanying table values
};

FlowState preset_profile(const PresetSpec& spec, const ProfileGrid& grid);

/// Reads a two-column CSV (header row, then x,rho) into a table preset.
PresetSpec load_table_csv(const std::string& path);

const char* preset_kind_name(PresetKind kind);
PresetKind preset_kind_from_name(const std::string& name);

}  // namespace neckflow
