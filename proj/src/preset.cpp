#include "neckflow/preset.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace neckflow {

namespace {

Scalar require_param(const PresetSpec& spec, const std::string& key) {
    auto it = spec.params.find(key);
    if (it == spec.params.end()) {
        throw ConfigError("preset " + std::string(preset_kind_name(spec.kind)) +
                          ": missing parameter '" + key + "'");
    }
    return it->second;
}

}  // namespace

const char* preset_kind_name(PresetKind kind) {
    switch (kind) {
        case PresetKind::cylinder: return "cylinder";
        case PresetKind::cosine_neck: return "cosine_neck";
        case PresetKind::catenoid: return "catenoid";
        case PresetKind::table: return "table";
    }
    return "?";
}

PresetKind preset_kind_from_name(const std::string& name) {
    if (name == "cylinder") return PresetKind::cylinder;
    if (name == "cosine_neck") return PresetKind::cosine_neck;
    if (name == "catenoid") return PresetKind::catenoid;
    if (name == "table") return PresetKind::table;
    throw ConfigError("unknown preset kind '" + name + "'");
}

FlowState preset_profile(const PresetSpec& spec, const ProfileGrid& grid) {
    FlowState state;
    state.grid = grid;
    state.t = 0;

    switch (spec.kind) {
        case PresetKind::cylinder: {
            const Scalar r = require_param(spec, "r");
            if (r <= 0) throw ConfigError("preset cylinder: radius r must be positive");
            state.rho = Array::Constant(grid.n, r);
            break;
        }
        case PresetKind::cosine_neck: {
            const Scalar m = require_param(spec, "m");
            const Scalar amp = require_param(spec, "A");
            const Scalar w = require_param(spec, "w");
            if (!(m > amp && amp > 0)) {
                throw ConfigError("preset cosine_neck: requires m > A > 0 so that rho > 0");
            }
            if (w < 1 || std::abs(w - std::round(w)) > 1e-12) {
                throw ConfigError("preset cosine_neck: mode count w must be a positive integer");
            }
            const Scalar span = grid.b - grid.a;
            state.rho = m + amp * (w * M_PI * (grid.nodes - grid.a) / span).cos();
            break;
        }
        case PresetKind::catenoid: {
            const Scalar c = require_param(spec, "c");
            if (c <= 0) throw ConfigError("preset catenoid: scale c must be positive");
            state.rho = c * (grid.nodes / c).cosh();
            break;
        }
        case PresetKind::table: {
            if (!spec.table) throw ConfigError("preset table: no values loaded");
            if (spec.table->size() != grid.n) {
                throw ConfigError("preset table: " + std::to_string(spec.table->size()) +
                                  " values for a grid of " + std::to_string(grid.n) + " nodes");
            }
            if (spec.table_x) {
                const Scalar tol = grid.h / 100;
                for (Index j = 0; j < grid.n; ++j) {
                    if (std::abs((*spec.table_x)[j] - grid.nodes[j]) > tol) {
                        throw ConfigError("preset table: x[" + std::to_string(j) +
                                          "] does not match the grid node within h/100");
                    }
                }
            }
            state.rho = *spec.table;
            break;
        }
    }

    if ((state.rho <= Scalar(0)).any()) {
        throw ConfigError(std::string("preset ") + preset_kind_name(spec.kind) +
                          ": produced a non-positive radius");
    }
    validate_state(state);
    return state;
}

PresetSpec load_table_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open table preset file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw ConfigError("table preset: empty file " + path);

    std::vector<Scalar> xs, rs;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string xf, rf;
        if (!std::getline(ss, xf, ',') || !std::getline(ss, rf, ',')) {
            throw ConfigError("table preset: line " + std::to_string(lineno) +
                              " is not 'x,rho' in " + path);
        }
        try {
            xs.push_back(std::stod(xf));
            rs.push_back(std::stod(rf));
        } catch (const std::exception&) {
            throw ConfigError("table preset: non-numeric entry on line " +
                              std::to_string(lineno) + " of " + path);
        }
    }

    PresetSpec spec;
    spec.kind = PresetKind::table;
    spec.table = Eigen::Map<const Array>(rs.data(), static_cast<Index>(rs.size()));
    spec.table_x = Eigen::Map<const Array>(xs.data(), static_cast<Index>(xs.size()));
    return spec;
}

}  // namespace neckflow
